#include "vqpi/cli.hpp"

int main(int argc, char** argv) { return vqpi::run_cli(argc, argv); }
