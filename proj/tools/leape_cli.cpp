#include "leape/cli.hpp"

int main(int argc, char** argv) { return leape::run_cli(argc, argv); }
