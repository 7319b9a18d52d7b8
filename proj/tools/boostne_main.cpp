#include "cli.hpp"

int main(int argc, char** argv) { return boostne::cli::main_entry(argc, argv); }
