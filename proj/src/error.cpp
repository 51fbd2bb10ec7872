#include "geotri/error.hpp"

namespace geotri {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

MissingModel::MissingModel(const std::string& label)
    : Error("no model for relation '" + label + "'"), label_(label) {}

}  // namespace geotri
