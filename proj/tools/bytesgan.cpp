#include "bytesgan/cli.hpp"

int main(int argc, char** argv) { return bytesgan::run_cli(argc, argv); }
