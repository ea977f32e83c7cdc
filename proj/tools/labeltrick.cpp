#include "labeltrick/cli.hpp"

int main(int argc, char** argv) {
  return labeltrick::cli::dispatch(argc, argv);
}
