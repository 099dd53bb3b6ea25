#include "puac/cli.hpp"

int main(int argc, char** argv) { return puac::run_cli(argc, argv); }
