#include "pinn/network.hpp"

#include <charconv>
#include <cstring>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pinn::network {

using autodiff::Jet;
using autodiff::Tape;
using autodiff::UsageError;
using autodiff::Var;

const char* activation_name(Activation a) noexcept {
    return a == Activation::tanh ? "tanh" : "sin";
}

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sin") return Activation::sin;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
    if (input_dim < 1 || input_dim > autodiff::kMaxInputDim) {
        throw UsageError("MlpSpec: input_dim must be 1 or 2");
    }
    if (output_dim < 1) throw UsageError("MlpSpec: output_dim must be >= 1");
    for (int w : hidden_layers) {
        if (w < 1) throw UsageError("MlpSpec: layer widths must be >= 1");
    }
}

ParamStore::ParamStore(const MlpSpec& spec) {
    spec.validate();
    std::size_t offset = 0;
    int fan_in = spec.input_dim;
    auto add_layer = [&](int fan_out) {
        LayerLayout l;
        l.rows = fan_out;
        l.cols = fan_in;
        l.weight_offset = offset;
        offset += static_cast<std::size_t>(fan_out) * fan_in;
        l.bias_offset = offset;
        offset += fan_out;
        layout_.push_back(l);
        fan_in = fan_out;
    };
    for (int w : spec.hidden_layers) add_layer(w);
    add_layer(spec.output_dim);
    network_size_ = offset;
    flat.assign(offset, 0.0);
}

std::size_t ParamStore::add_extra(const std::string& name, double value) {
    if (has_extra(name)) throw UsageError("duplicate extra parameter '" + name + "'");
    extra_names_.push_back(name);
    flat.push_back(value);
    return flat.size() - 1;
}

bool ParamStore::has_extra(const std::string& name) const noexcept {
    for (const auto& n : extra_names_) {
        if (n == name) return true;
    }
    return false;
}

std::size_t ParamStore::extra_index(const std::string& name) const {
    for (std::size_t k = 0; k < extra_names_.size(); ++k) {
        if (extra_names_[k] == name) return network_size_ + k;
    }
    throw UsageError("no extra parameter named '" + name + "'");
}

bool ParamStore::operator==(const ParamStore& other) const {
    if (flat.size() != other.flat.size() || layout_.size() != other.layout_.size()) return false;
    if (network_size_ != other.network_size_ || extra_names_ != other.extra_names_) return false;
    for (std::size_t k = 0; k < layout_.size(); ++k) {
        const auto& a = layout_[k];
        const auto& b = other.layout_[k];
        if (a.rows != b.rows || a.cols != b.cols || a.weight_offset != b.weight_offset ||
            a.bias_offset != b.bias_offset) {
            return false;
        }
    }
    // Bitwise comparison: -0.0 and 0.0 differ, NaN equals itself.
    for (std::size_t k = 0; k < flat.size(); ++k) {
        if (std::memcmp(&flat[k], &other.flat[k], sizeof(double)) != 0) return false;
    }
    return true;
}

ParamStore init_glorot(const MlpSpec& spec) {
    ParamStore p(spec);
    std::mt19937_64 rng(spec.seed);
    for (const auto& l : p.layout()) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.cols + l.rows));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (int k = 0; k < l.rows * l.cols; ++k) p.flat[l.weight_offset + k] = dist(rng);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("invalid number '" + s + "'");
    }
    return v;
}

} // namespace

void save_params(std::ostream& os, const MlpSpec& spec, const ParamStore& params) {
    os << "pinn-params 1\n";
    os << "input_dim " << spec.input_dim << "\n";
    os << "hidden";
    for (int w : spec.hidden_layers) os << ' ' << w;
    os << "\n";
    os << "output_dim " << spec.output_dim << "\n";
    os << "activation " << activation_name(spec.activation) << "\n";
    os << "seed " << spec.seed << "\n";
    os << "extras " << params.extra_names().size();
    for (const auto& n : params.extra_names()) os << ' ' << n;
    os << "\n";
    os << "values " << params.flat.size() << "\n";
    for (double v : params.flat) os << format_double(v) << "\n";
}

ParamStore load_params(std::istream& is, MlpSpec& spec) {
    auto expect_key = [&](const std::string& key) {
        std::string k;
        if (!(is >> k) || k != key) {
            throw std::runtime_error("params file: expected '" + key + "'");
        }
    };
    expect_key("pinn-params");
    int version = 0;
    is >> version;
    if (version != 1) throw std::runtime_error("params file: unsupported version");

    MlpSpec s;
    expect_key("input_dim");
    is >> s.input_dim;
    expect_key("hidden");
    std::string line;
    std::getline(is, line);
    std::istringstream hs(line);
    for (int w; hs >> w;) s.hidden_layers.push_back(w);
    expect_key("output_dim");
    is >> s.output_dim;
    expect_key("activation");
    std::string act;
    is >> act;
    s.activation = parse_activation(act);
    expect_key("seed");
    is >> s.seed;
    expect_key("extras");
    std::size_t n_extra = 0;
    is >> n_extra;
    std::vector<std::string> names(n_extra);
    for (auto& n : names) is >> n;
    expect_key("values");
    std::size_t n_values = 0;
    is >> n_values;
    if (!is) throw std::runtime_error("params file: malformed header");

    ParamStore p(s);
    for (const auto& n : names) p.add_extra(n, 0.0);
    if (p.flat.size() != n_values) {
        throw std::runtime_error("params file: value count does not match layout");
    }
    for (auto& v : p.flat) {
        std::string tok;
        if (!(is >> tok)) throw std::runtime_error("params file: truncated values");
        v = parse_double(tok);
    }
    spec = s;
    return p;
}

// ---------------------------------------------------------------------------
// Tape forward

BoundParams bind_params(Tape& tape, const ParamStore& params) {
    BoundParams b;
    b.vars.reserve(params.flat.size());
    for (double v : params.flat) b.vars.push_back(tape.param(v));
    return b;
}

namespace {

Jet add_scalar(const Jet& a, Var c) {
    Jet r = a;
    r.value = a.value + c;
    return r;
}

Jet activate(Activation act, const Jet& z) {
    return act == Activation::tanh ? autodiff::tanh(z) : autodiff::sin(z);
}

} // namespace

std::vector<Jet> forward(const MlpSpec& spec, const ParamStore& params, const BoundParams& bound,
                         std::span<const Jet> input) {
    if (static_cast<int>(input.size()) != spec.input_dim) {
        throw UsageError("forward: input size does not match input_dim");
    }
    if (bound.vars.size() != params.flat.size()) {
        throw UsageError("forward: bound parameters do not match the store");
    }
    std::vector<Jet> h(input.begin(), input.end());
    const auto layout = params.layout();
    for (std::size_t l = 0; l < layout.size(); ++l) {
        const auto& L = layout[l];
        if (static_cast<int>(h.size()) != L.cols) throw UsageError("forward: layer size mismatch");
        const bool last = l + 1 == layout.size();
        std::vector<Jet> next;
        next.reserve(L.rows);
        for (int r = 0; r < L.rows; ++r) {
            // column-major: W(r, c) at weight_offset + c * rows + r
            Jet acc = h[0] * bound.vars[L.weight_offset + r];
            for (int c = 1; c < L.cols; ++c) {
                acc = acc + h[c] * bound.vars[L.weight_offset + static_cast<std::size_t>(c) * L.rows + r];
            }
            acc = add_scalar(acc, bound.vars[L.bias_offset + r]);
            next.push_back(last ? acc : activate(spec.activation, acc));
        }
        h = std::move(next);
    }
    return h;
}

std::vector<Jet> forward(const MlpSpec& spec, const ParamStore& params, Tape& tape,
                         std::span<const Jet> input) {
    const BoundParams bound = bind_params(tape, params);
    return forward(spec, params, bound, input);
}

// ---------------------------------------------------------------------------
// Output transform

bool OutputTransform::has_anchor() const noexcept {
    for (const auto& r : rules) {
        if (r.anchored) return true;
    }
    return false;
}

std::vector<Jet> apply_transform(const OutputTransform& transform, std::span<const Jet> x,
                                 std::span<const Jet> raw, std::span<const Var> anchor_raw) {
    if (transform.rules.empty()) return {raw.begin(), raw.end()};
    if (transform.rules.size() != raw.size()) {
        throw UsageError("apply_transform: rule count does not match output count");
    }
    Tape& tape = raw.front().tape();
    const int dim = raw.front().dim;
    const int order = raw.front().order;

    std::vector<Jet> anchor_x;
    if (transform.has_anchor()) {
        if (anchor_raw.size() != raw.size()) {
            throw UsageError("apply_transform: anchored rule needs raw outputs at the anchor");
        }
        for (int i = 0; i < dim; ++i) {
            anchor_x.push_back(autodiff::seed(tape, transform.anchor.at(i), dim, i, 0));
        }
    }

    std::vector<Jet> out;
    out.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const OutputRule& rule = transform.rules[k];
        Jet y = rule.multiplier ? rule.multiplier(x) * raw[k] : raw[k];
        if (rule.offset) y = y + rule.offset(x);
        if (rule.anchored) {
            Var a = anchor_raw[k];
            if (rule.multiplier) a = rule.multiplier(anchor_x).value * a;
            if (rule.offset) a = a + rule.offset(anchor_x).value;
            y.value = y.value - a;
        }
        out.push_back(y);
    }
    (void)order;
    return out;
}

// ---------------------------------------------------------------------------
// Batched kernel

int channel_count(int dim, int order) noexcept {
    return 1 + (order >= 1 ? dim : 0) + (order == 2 ? dim : 0);
}

BatchEvaluator::BatchEvaluator(const MlpSpec& spec) : spec_(spec) { spec_.validate(); }

namespace {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;

Eigen::Map<const MatrixXd> weight(const Eigen::VectorXd& p, const LayerLayout& l) {
    return {p.data() + l.weight_offset, l.rows, l.cols};
}

Eigen::Map<const Eigen::VectorXd> bias(const Eigen::VectorXd& p, const LayerLayout& l) {
    return {p.data() + l.bias_offset, l.rows};
}

} // namespace

const MatrixXd& BatchEvaluator::forward(const ParamStore& params, const MatrixXd& points,
                                        int order) {
    if (points.rows() != spec_.input_dim) throw UsageError("batch forward: wrong point dimension");
    if (order < 0 || order > 2) throw UsageError("batch forward: order must be 0, 1 or 2");
    const int dim = spec_.input_dim;
    const int C = channel_count(dim, order);
    const Index n = points.cols();
    order_ = order;
    n_ = n;

    // Buffers are kept between calls; large reallocations dominate otherwise.
    // Parameters are copied into owned storage so vectorized kernels see the
    // same alignment on every call, which keeps results bitwise reproducible.
    const auto layout = params.layout();
    theta_ = Eigen::Map<const Eigen::VectorXd>(params.flat.data(),
                                               static_cast<Index>(params.network_size()));
    cache_.resize(layout.size());
    MatrixXd& in0 = cache_[0].input;
    in0.setZero(dim, C * n);
    in0.leftCols(n) = points;
    for (int i = 0; i < dim && order >= 1; ++i) in0.block(i, (1 + i) * n, 1, n).setOnes();

    for (std::size_t l = 0; l < layout.size(); ++l) {
        const auto& L = layout[l];
        LayerCache& c = cache_[l];
        c.z.resize(L.rows, C * n);
        c.z.noalias() = weight(theta_, L) * c.input;
        c.z.leftCols(n).colwise() += bias(theta_, L);
        if (l + 1 == layout.size()) {
            output_ = c.z;
            break;
        }
        MatrixXd& h = cache_[l + 1].input;
        h.resize(L.rows, C * n);
        auto z0 = c.z.leftCols(n).array();
        auto a0 = h.leftCols(n).array();
        if (spec_.activation == Activation::tanh) {
            // exp-based form vectorizes; Eigen's double tanh does not.
            a0 = 1.0 - 2.0 / ((2.0 * z0).exp() + 1.0);
            c.p1 = 1.0 - a0.square();
            if (order >= 1) c.p2 = -2.0 * a0 * c.p1;
            if (order == 2) c.p3 = -2.0 * c.p1.square() - 2.0 * a0 * c.p2;
        } else {
            a0 = z0.sin();
            c.p1 = z0.cos();
            if (order >= 1) c.p2 = -a0;
            if (order == 2) c.p3 = -c.p1;
        }
        for (int i = 0; i < dim && order >= 1; ++i) {
            const auto zi = c.z.middleCols((1 + i) * n, n).array();
            h.middleCols((1 + i) * n, n).array() = c.p1 * zi;
            if (order == 2) {
                const auto zii = c.z.middleCols((1 + dim + i) * n, n).array();
                h.middleCols((1 + dim + i) * n, n).array() = c.p2 * zi.square() + c.p1 * zii;
            }
        }
    }
    return output_;
}

void BatchEvaluator::backward(const ParamStore& params, const MatrixXd& output_adjoint,
                              std::span<double> grad) {
    const auto layout = params.layout();
    if (cache_.size() != layout.size()) throw UsageError("batch backward before forward");
    if (output_adjoint.rows() != output_.rows() || output_adjoint.cols() != output_.cols()) {
        throw UsageError("batch backward: adjoint shape mismatch");
    }
    if (grad.size() < params.network_size()) throw UsageError("batch backward: gradient too short");
    const int dim = spec_.input_dim;
    const Index n = n_;
    const int order = order_;

    // ga_: adjoint of a layer's activation output, gz_: of its pre-activation.
    gz_ = output_adjoint;
    gtheta_.setZero(theta_.size());
    for (std::size_t l = layout.size(); l-- > 0;) {
        const auto& L = layout[l];
        LayerCache& c = cache_[l];
        if (l + 1 != layout.size()) {
            gz_.resize(ga_.rows(), ga_.cols());
            auto g0 = gz_.leftCols(n).array();
            g0 = ga_.leftCols(n).array() * c.p1;
            for (int i = 0; i < dim && order >= 1; ++i) {
                const auto zi = c.z.middleCols((1 + i) * n, n).array();
                const auto gai = ga_.middleCols((1 + i) * n, n).array();
                g0 += gai * c.p2 * zi;
                auto gzi = gz_.middleCols((1 + i) * n, n).array();
                gzi = gai * c.p1;
                if (order == 2) {
                    const auto zii = c.z.middleCols((1 + dim + i) * n, n).array();
                    const auto gaii = ga_.middleCols((1 + dim + i) * n, n).array();
                    g0 += gaii * (c.p3 * zi.square() + c.p2 * zii);
                    gzi += 2.0 * gaii * c.p2 * zi;
                    gz_.middleCols((1 + dim + i) * n, n).array() = gaii * c.p1;
                }
            }
        }
        Eigen::Map<MatrixXd> gw(gtheta_.data() + L.weight_offset, L.rows, L.cols);
        Eigen::Map<Eigen::VectorXd> gb(gtheta_.data() + L.bias_offset, L.rows);
        gw.noalias() += gz_ * c.input.transpose();
        gb += gz_.leftCols(n).rowwise().sum();
        if (l > 0) {
            ga_.resize(L.cols, gz_.cols());
            ga_.noalias() = weight(theta_, L).transpose() * gz_;
        }
    }
    for (Index i = 0; i < gtheta_.size(); ++i) grad[static_cast<std::size_t>(i)] += gtheta_[i];
}

// ---------------------------------------------------------------------------

BatchLeaves::BatchLeaves(Tape& tape, const MatrixXd& output, int dim, int order)
    : tape_(&tape), rows_(output.rows()), cols_(output.cols()), dim_(dim), order_(order) {
    const int C = channel_count(dim, order);
    if (cols_ % C != 0) throw UsageError("BatchLeaves: column count is not a multiple of channels");
    n_ = cols_ / C;
    first_param_ = tape.param_ids().size();
    leaves_.reserve(static_cast<std::size_t>(rows_ * cols_));
    for (Index c = 0; c < cols_; ++c) {
        for (Index r = 0; r < rows_; ++r) leaves_.push_back(tape.param(output(r, c)));
    }
}

Jet BatchLeaves::jet(Index point, int output) const {
    auto at = [&](Index block) { return leaves_[(block * n_ + point) * rows_ + output]; };
    Jet j;
    j.dim = static_cast<std::uint8_t>(dim_);
    j.order = static_cast<std::uint8_t>(order_);
    j.value = at(0);
    for (int i = 0; i < dim_ && order_ >= 1; ++i) {
        j.d1[i] = at(1 + i);
        if (order_ == 2) j.d2[i] = at(1 + dim_ + i);
    }
    return j;
}

void BatchLeaves::gather_adjoint(std::span<const double> grad, MatrixXd& adjoint) const {
    adjoint.resize(rows_, cols_);
    for (Index c = 0; c < cols_; ++c) {
        for (Index r = 0; r < rows_; ++r) {
            adjoint(r, c) = grad[first_param_ + static_cast<std::size_t>(c * rows_ + r)];
        }
    }
}

} // namespace pinn::network
