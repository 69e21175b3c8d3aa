#include "orbitglue/report.hpp"

int main(int argc, char** argv) { return orbitglue::cli_main(argc, argv); }
