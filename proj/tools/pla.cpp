#include "pla/commands.hpp"

int main(int argc, char** argv) { return pla::cli::run(argc, argv); }
