#include "cli.hpp"

int main(int argc, char** argv) { return fraqhom::cli::main(argc, argv); }
