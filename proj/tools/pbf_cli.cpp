#include "pbf/harness.hpp"

int main(int argc, char** argv) { return pbf::cli_main(argc, argv); }
