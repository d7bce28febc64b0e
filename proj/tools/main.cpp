#include "wordlelab/cli.hpp"

int main(int argc, char** argv) {
    return wordlelab::cli::run(argc, argv);
}
