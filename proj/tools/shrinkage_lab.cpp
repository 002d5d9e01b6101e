#include "cli/cli.hpp"

int main(int argc, char** argv) { return shrinkage_lab::cli::main(argc, argv); }
