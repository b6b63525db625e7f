#pragma once

#include <stdexcept>
#include <string>

namespace phyloalg {

// Malformed input text (Newick, tables, rationals, matrix files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates an operation's precondition.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Leaf sets of trees, distributions or splits do not agree.
class LeafMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace phyloalg
