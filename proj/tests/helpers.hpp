#ifndef ASYNCST_TESTS_HELPERS_HPP_
#define ASYNCST_TESTS_HELPERS_HPP_

#include <fstream>
#include <sstream>
#include <string>

#include "asyncst/parse.hpp"

namespace asyncst::testing {

inline std::string corpusPath(const std::string& name) {
  return std::string(ASYNCST_CORPUS_DIR) + "/" + name;
}

inline std::string readCorpus(const std::string& name) {
  std::ifstream f(corpusPath(name));
  if (!f) throw std::runtime_error("missing corpus file " + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Program corpusProgram(const std::string& name) {
  return parseProgram(readCorpus(name));
}

inline GlobalType corpusProto(const std::string& protoName, const Program* prog = nullptr) {
  return parseGlobalType(readCorpus(protoName), prog);
}

}  // namespace asyncst::testing

#endif  // ASYNCST_TESTS_HELPERS_HPP_
