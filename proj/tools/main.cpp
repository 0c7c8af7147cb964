#include "affectsense/cli.hpp"

int main(int argc, char** argv) { return affectsense::run_command(argc, argv); }
