#include "distillery/harness.hpp"

int main(int argc, char** argv) { return distillery::cli_main(argc, argv); }
