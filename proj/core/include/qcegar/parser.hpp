#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qcegar/formula.hpp"

namespace qcegar {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line), message_(message) {}

  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// QCIR-G14 reader. Gates may be referenced before their definition; and/or/xor/ite
/// and nested quantifier gates are supported. Nested quantifiers are hoisted into
/// the prefix in preorder of first expansion, with fresh variables per occurrence.
QbfProblem parse_qcir(std::string_view text);

/// Emits QCIR-G14 with one gate per compound node, children first. Gate ids are
/// numbered densely after the variable ids.
std::string write_qcir(const QbfProblem& problem);

/// Gate id that write_qcir assigns to each node; 0 for literal nodes.
std::vector<std::size_t> qcir_gate_ids(const QbfProblem& problem);

QbfProblem parse_qdimacs(std::string_view text);

enum class InputFormat { Qcir, Qdimacs };

/// Guess from the file extension, then from the first non-comment line.
InputFormat detect_format(const std::string& path, std::string_view text);

/// Reads a file and parses it in the detected format. Throws Error if unreadable.
QbfProblem read_problem_file(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace qcegar
