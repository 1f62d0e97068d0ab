#pragma once

#include <stdexcept>
#include <string>

namespace cilia {

/// Invalid argument or violated precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative or adaptive method could not reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best error estimate reached before giving up.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainError(msg);
}
}  // namespace detail

}  // namespace cilia
