#include "opsplit/harness.hpp"

int main(int argc, char** argv) { return opsplit::run_cli(argc, argv); }
