#include "ado/cli/app.hpp"

int main(int argc, char** argv) { return ado::cli::main(argc, argv); }
