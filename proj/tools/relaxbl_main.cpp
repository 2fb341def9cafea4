#include "relaxbl/harness.hpp"

int main(int argc, char** argv) { return relaxbl::harness::run_cli(argc, argv); }
