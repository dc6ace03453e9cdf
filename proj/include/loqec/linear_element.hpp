#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "loqec/errors.hpp"
#include "loqec/mode.hpp"

namespace loqec {

using ComplexMatrix = Eigen::MatrixXcd;

/// Passive optic: a unitary from the (path, H/V) channels of `inputs` to those of `outputs`.
///
/// Channels are ordered path-major, [p0:H, p0:V, p1:H, p1:V, ...], and
/// matrix(i, j) is the amplitude for input channel j to leave on output channel i.
/// Temporal wavepackets pass through unchanged.
class LinearElement {
public:
    LinearElement(std::string name, std::vector<PathId> inputs, std::vector<PathId> outputs, ComplexMatrix matrix)
        : name_(std::move(name)), inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)) {
        if (inputs_.size() != outputs_.size() || inputs_.empty()) {
            throw ConfigurationError(name_ + ": input and output port counts must match and be non-zero");
        }
        require_distinct(inputs_, "input");
        require_distinct(outputs_, "output");
        const auto n = Eigen::Index(2 * inputs_.size());
        if (matrix_.rows() != n || matrix_.cols() != n) {
            throw ConfigurationError(name_ + ": matrix must be " + std::to_string(n) + "x" + std::to_string(n));
        }
        if (unitarity_error() > 1e-12) {
            throw ConfigurationError(name_ + ": matrix is not unitary");
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<PathId>& inputs() const { return inputs_; }
    const std::vector<PathId>& outputs() const { return outputs_; }
    const ComplexMatrix& matrix() const { return matrix_; }

    std::vector<Channel> input_channels() const { return channels(inputs_); }
    std::vector<Channel> output_channels() const { return channels(outputs_); }

    bool acts_on(const PathId& p) const { return std::find(inputs_.begin(), inputs_.end(), p) != inputs_.end(); }

    /// max |(U^dagger U - 1)_ij|
    double unitarity_error() const {
        const ComplexMatrix g = matrix_.adjoint() * matrix_ - ComplexMatrix::Identity(matrix_.rows(), matrix_.cols());
        return g.cwiseAbs().maxCoeff();
    }

    /// Image of the creation operator of `mode`, as (output mode, amplitude) terms.
    /// Modes outside the element map to themselves with amplitude exactly 1.
    std::vector<std::pair<ModeLabel, Complex>> image(const ModeLabel& mode) const {
        const auto it = std::find(inputs_.begin(), inputs_.end(), mode.path);
        if (it == inputs_.end()) return {{mode, Complex{1.0, 0.0}}};
        const auto col = Eigen::Index(2 * (it - inputs_.begin()) + static_cast<int>(mode.pol));
        std::vector<std::pair<ModeLabel, Complex>> out;
        for (Eigen::Index row = 0; row < matrix_.rows(); ++row) {
            const Complex u = matrix_(row, col);
            if (u == Complex{}) continue;
            out.emplace_back(ModeLabel(outputs_[std::size_t(row / 2)], kPolarizations[std::size_t(row % 2)], mode.temporal), u);
        }
        return out;
    }

private:
    void require_distinct(const std::vector<PathId>& ps, const char* what) const {
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                if (ps[i] == ps[j]) throw ConfigurationError(name_ + ": repeated " + what + " path '" + ps[i].name() + "'");
    }

    static std::vector<Channel> channels(const std::vector<PathId>& ps) {
        std::vector<Channel> out;
        for (const auto& p : ps)
            for (auto pol : kPolarizations) out.push_back({p, pol});
        return out;
    }

    std::string name_;
    std::vector<PathId> inputs_;
    std::vector<PathId> outputs_;
    ComplexMatrix matrix_;
};

} // namespace loqec
