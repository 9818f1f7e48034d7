#include "onehom/cli.hpp"

int main(int argc, char** argv) { return onehom::cli::main_entry(argc, argv); }
