#pragma once

#include <stdexcept>
#include <string>

namespace freeshell
{

/** @brief Base class of every error raised by the library */
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FREESHELL_DEFINE_ERROR(Name)                                  \
    class Name : public Error                                         \
    {                                                                 \
    public:                                                           \
        explicit Name(const std::string& msg) : Error(msg) {}         \
    };

FREESHELL_DEFINE_ERROR(ParseError)
FREESHELL_DEFINE_ERROR(TopologyError)
FREESHELL_DEFINE_ERROR(IoError)
FREESHELL_DEFINE_ERROR(RemeshError)
FREESHELL_DEFINE_ERROR(SolveError)
FREESHELL_DEFINE_ERROR(NonFiniteError)
FREESHELL_DEFINE_ERROR(ConvergenceError)
FREESHELL_DEFINE_ERROR(DivergenceError)
FREESHELL_DEFINE_ERROR(DomainError)
FREESHELL_DEFINE_ERROR(GeometryError)
FREESHELL_DEFINE_ERROR(ConfigError)

#undef FREESHELL_DEFINE_ERROR

/**
 * @brief Rethrow the in-flight library error with `label: ` prepended,
 * preserving its dynamic type.
 */
[[noreturn]] void rethrow_with_label(const std::string& label);

}  // namespace freeshell
