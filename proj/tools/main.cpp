#include "lyrav/cli_app.hpp"

int main(int argc, char** argv) { return lyrav::cli::run(argc, argv); }
