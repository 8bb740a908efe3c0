#include "cansig/cli.hpp"

int main(int argc, char** argv) { return cansig::cli::main(argc, argv); }
