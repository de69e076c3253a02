#include "mdaml/cli.hpp"

int main(int argc, char** argv) { return mdaml::cli::run(argc, argv); }
