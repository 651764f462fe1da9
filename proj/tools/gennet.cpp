#include "gennet/cli.hpp"

int main(int argc, char** argv) { return gennet::cli::main_entry(argc, argv); }
