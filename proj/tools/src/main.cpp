#include "commands.hpp"

int main(int argc, char** argv) { return mtjsnn::cli::run(argc, argv); }
