#include "wishfx/cli.hpp"

int main(int argc, char** argv) { return wishfx::cli::run(argc, argv); }
