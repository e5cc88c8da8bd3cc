#pragma once

/// \file network.hpp
///
/// Fully-connected feed-forward network: architecture description, flat
/// parameter storage, Glorot initialization, a tape-based forward pass over
/// jets, hard-constraint output transforms and a batched jet kernel used for
/// training.

#include "pinn/autodiff.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pinn::network {

enum class Activation { tanh, sin };

const char* activation_name(Activation a) noexcept;
Activation parse_activation(const std::string& name);

struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden_layers;
    int output_dim = 1;
    Activation activation = Activation::tanh;
    std::uint64_t seed = 0;

    /// Throws autodiff::UsageError when an invariant is violated.
    void validate() const;
};

struct LayerLayout {
    int rows = 0; ///< fan-out
    int cols = 0; ///< fan-in
    std::size_t weight_offset = 0; ///< column-major rows x cols block
    std::size_t bias_offset = 0;
};

/// Flat trainable-parameter vector. Layer weights and biases come first,
/// named extra scalars (e.g. an identified ODE coefficient) are appended.
class ParamStore {
  public:
    ParamStore() = default;
    explicit ParamStore(const MlpSpec& spec);

    std::vector<double> flat;

    std::span<const LayerLayout> layout() const noexcept { return layout_; }
    std::size_t network_size() const noexcept { return network_size_; }

    std::size_t add_extra(const std::string& name, double value);
    bool has_extra(const std::string& name) const noexcept;
    std::size_t extra_index(const std::string& name) const;
    double extra(const std::string& name) const { return flat[extra_index(name)]; }
    std::span<const std::string> extra_names() const noexcept { return extra_names_; }

    bool operator==(const ParamStore& other) const;

  private:
    std::vector<LayerLayout> layout_;
    std::size_t network_size_ = 0;
    std::vector<std::string> extra_names_;
};

/// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases 0.
ParamStore init_glorot(const MlpSpec& spec);

/// Text format: layout header followed by one shortest round-trip decimal per
/// line. Reading back reproduces every value bit-for-bit.
void save_params(std::ostream& os, const MlpSpec& spec, const ParamStore& params);
ParamStore load_params(std::istream& is, MlpSpec& spec);

/// Parameters registered as trainable leaves of a tape, in flat order.
struct BoundParams {
    std::vector<autodiff::Var> vars;
};
BoundParams bind_params(autodiff::Tape& tape, const ParamStore& params);

/// Raw network output N(x; theta) as jets, every node on the tape.
std::vector<autodiff::Jet> forward(const MlpSpec& spec, const ParamStore& params,
                                   const BoundParams& bound,
                                   std::span<const autodiff::Jet> input);
std::vector<autodiff::Jet> forward(const MlpSpec& spec, const ParamStore& params,
                                   autodiff::Tape& tape, std::span<const autodiff::Jet> input);

using CoordinateFn = std::function<autodiff::Jet(std::span<const autodiff::Jet>)>;

/// out = multiplier(x) * raw + offset(x). An anchored rule additionally
/// subtracts its own value at the transform's anchor point, pinning the
/// output to zero there without constraining its derivatives.
struct OutputRule {
    CoordinateFn multiplier; ///< empty means 1
    CoordinateFn offset;     ///< empty means 0
    bool anchored = false;
};

struct OutputTransform {
    std::vector<OutputRule> rules; ///< empty means identity for every output
    std::vector<double> anchor;    ///< coordinates of the anchor point

    bool has_anchor() const noexcept;
};

/// `anchor_raw` holds the raw outputs evaluated at transform.anchor and is only
/// read for anchored rules.
std::vector<autodiff::Jet> apply_transform(const OutputTransform& transform,
                                           std::span<const autodiff::Jet> x,
                                           std::span<const autodiff::Jet> raw,
                                           std::span<const autodiff::Var> anchor_raw = {});

/// Channel layout of a batch: block 0 holds values, blocks 1..dim the first
/// derivatives, blocks dim+1..2*dim the diagonal second derivatives. Each
/// block is n_points columns wide.
int channel_count(int dim, int order) noexcept;

/// Batched forward-over-reverse kernel for one group of points sharing a jet
/// order. forward() caches the intermediates that backward() needs.
class BatchEvaluator {
  public:
    explicit BatchEvaluator(const MlpSpec& spec);

    /// points: input_dim x n. Returns output_dim x (channels * n).
    const Eigen::MatrixXd& forward(const ParamStore& params, const Eigen::MatrixXd& points,
                                   int order);

    /// Adds d(loss)/d(theta) for the network part of `grad` given the adjoint
    /// of the last forward() output.
    void backward(const ParamStore& params, const Eigen::MatrixXd& output_adjoint,
                  std::span<double> grad);

    int order() const noexcept { return order_; }
    Eigen::Index n_points() const noexcept { return n_; }
    const Eigen::MatrixXd& output() const noexcept { return output_; }

  private:
    struct LayerCache {
        Eigen::MatrixXd input; // width_in x channels*n
        Eigen::MatrixXd z;     // width_out x channels*n (pre-activation)
        Eigen::ArrayXXd p1, p2, p3;
    };

    MlpSpec spec_;
    int order_ = 0;
    Eigen::Index n_ = 0;
    std::vector<LayerCache> cache_;
    Eigen::MatrixXd output_;
    Eigen::MatrixXd ga_, gz_;
    Eigen::VectorXd theta_, gtheta_;
};

/// Evaluates transformed-jet leaves taken from a batch output: every entry of
/// the output matrix becomes a trainable leaf of the tape so the physics head
/// can be differentiated back into the batch kernel.
class BatchLeaves {
  public:
    BatchLeaves(autodiff::Tape& tape, const Eigen::MatrixXd& output, int dim, int order);

    autodiff::Jet jet(Eigen::Index point, int output) const;
    /// Scatter the gradient returned by Tape::backward into an adjoint matrix
    /// shaped like the batch output.
    void gather_adjoint(std::span<const double> grad, Eigen::MatrixXd& adjoint) const;

  private:
    autodiff::Tape* tape_;
    std::vector<autodiff::Var> leaves_;
    std::size_t first_param_ = 0;
    Eigen::Index rows_ = 0, cols_ = 0, n_ = 0;
    int dim_ = 0, order_ = 0;
};

} // namespace pinn::network
