#include "faqkit/cli.hpp"

int main(int argc, char** argv) { return faqkit::cli::run(argc, argv); }
