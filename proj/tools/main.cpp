#include "dipfill/cli.hpp"

int main(int argc, char** argv) { return dipfill::cli_main(argc, argv); }
