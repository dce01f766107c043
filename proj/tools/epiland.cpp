#include "epiland/commands.hpp"

int main(int argc, char** argv) { return epiland::run_cli(argc, argv); }
