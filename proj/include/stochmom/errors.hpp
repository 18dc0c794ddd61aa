#ifndef STOCHMOM_ERRORS_HPP
#define STOCHMOM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochmom {

/// |psi| fell to or below the node threshold inside the evaluation region.
class NodeEncountered : public std::runtime_error {
public:
    NodeEncountered(double position, double relative_modulus)
        : std::runtime_error("wave function node at x = " + std::to_string(position) +
                             " (|psi|/max|psi| = " + std::to_string(relative_modulus) + ")"),
          position_{position}
    {}
    double position() const noexcept { return position_; }

private:
    double position_;
};

class UnsupportedPotential : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(int max_iter, double last_residual)
        : std::runtime_error("Picard iteration did not converge in " + std::to_string(max_iter) +
                             " iterations (last residual " + std::to_string(last_residual) + ")"),
          max_iter_{max_iter}, last_residual_{last_residual}
    {}
    int max_iter() const noexcept { return max_iter_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    int max_iter_;
    double last_residual_;
};

class TooFewSamples : public std::invalid_argument {
public:
    TooFewSamples(std::size_t got, std::size_t needed)
        : std::invalid_argument("need at least " + std::to_string(needed) + " samples, got " +
                                std::to_string(got))
    {}
};

/// Wraps a failure raised while simulating one ensemble member.
class PathFailure : public std::runtime_error {
public:
    PathFailure(std::size_t path_index, const std::string& what)
        : std::runtime_error("path " + std::to_string(path_index) + ": " + what),
          path_index_{path_index}
    {}
    std::size_t path_index() const noexcept { return path_index_; }

private:
    std::size_t path_index_;
};

}  // namespace stochmom

#endif  // STOCHMOM_ERRORS_HPP
