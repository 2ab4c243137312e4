#include "sabfl/harness/cli.hpp"

int main(int argc, char** argv) { return sabfl::cli_dispatch(argc, argv); }
