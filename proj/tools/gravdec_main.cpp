#include "gravdec/cli.hpp"

int main(int argc, char** argv) { return gravdec::cli::run_main(argc, argv); }
