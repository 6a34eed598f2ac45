#include "lanecrit/cli.hpp"

int main(int argc, char** argv) { return lanecrit::run_cli(argc, argv); }
