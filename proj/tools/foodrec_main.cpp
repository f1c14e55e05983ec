#include "foodrec/pipeline/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return foodrec::pipeline::run(args);
}
