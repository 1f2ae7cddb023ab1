#include "ensamp/cli.hpp"

int main(int argc, char** argv) { return ensamp::cli_main(argc, argv); }
