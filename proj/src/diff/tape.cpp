#include "emgrl/diff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::diff {

namespace {

void require_finite(std::span<const double> v, const char* context) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::domain_error(std::string(context) + ": non-finite value");
}

void require_same_tape(Var a, Var b, const char* context) {
    if (!a.valid() || !b.valid()) throw std::invalid_argument(std::string(context) + ": invalid Var");
    if (a.tape() != b.tape()) throw std::invalid_argument(std::string(context) + ": operands on different tapes");
}

void require_same_size(Var a, Var b, const char* context) {
    require_same_tape(a, b, context);
    if (a.size() != b.size()) throw DimensionError(context, a.size(), b.size());
}

}  // namespace

const Vec& Var::value() const {
    if (!tape_) throw std::logic_error("Var::value on an unbound Var");
    return tape_->nodes_[id_].value;
}

double Var::scalar() const {
    const Vec& v = value();
    if (v.size() != 1) throw DimensionError("Var::scalar", 1, v.size());
    return v[0];
}

void accumulate(std::vector<Vec>& adj, std::size_t id, std::span<const double> g) {
    Vec& dst = adj[id];
    if (dst.empty()) {
        dst.assign(g.begin(), g.end());
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

Var Tape::record(Vec value, BackFn back, std::size_t rows, std::size_t cols) {
    Node n;
    n.rows = rows == 0 ? value.size() : rows;
    n.cols = cols;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Vec value) {
    require_finite(value, "Tape::constant");
    return record(std::move(value), nullptr);
}

Var Tape::param(const ParamSet& params, const std::string& name) {
    auto key = std::make_pair(&params, name);
    if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var(this, it->second);
    const Block& b = params.at(name);
    require_finite(b.values(), "Tape::param");
    Var v = record(b.vec(), nullptr, b.rows(), b.cols());
    param_nodes_.emplace(std::move(key), v.id());
    return v;
}

Adjoints Tape::backward(Var loss) const {
    if (loss.tape() != this) throw std::invalid_argument("Tape::backward: loss recorded on another tape");
    if (loss.size() != 1) throw DimensionError("Tape::backward: loss must be scalar", 1, loss.size());
    Adjoints out;
    out.tape_ = this;
    out.adj_.assign(nodes_.size(), Vec{});
    out.adj_[loss.id()] = Vec{1.0};
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        if (!n.back || out.adj_[i].empty()) continue;
        // Copy: the rule may accumulate into adj while reading grad_out.
        const Vec g = out.adj_[i];
        n.back(*this, g, out.adj_);
    }
    return out;
}

Vec Adjoints::wrt(Var v) const {
    if (v.tape() != tape_) throw std::invalid_argument("Adjoints::wrt: Var from another tape");
    if (v.id() < adj_.size() && !adj_[v.id()].empty()) return adj_[v.id()];
    return Vec(v.size(), 0.0);
}

ParamSet Adjoints::params(const ParamSet& params) const {
    ParamSet grads = params.zeros_like();
    for (auto& [name, block] : grads) {
        auto it = tape_->param_nodes_.find(std::make_pair(&params, name));
        if (it == tape_->param_nodes_.end()) continue;
        if (it->second >= adj_.size() || adj_[it->second].empty()) continue;
        const Vec& g = adj_[it->second];
        std::copy(g.begin(), g.end(), block.values().begin());
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(Var a, Var b) {
    require_same_size(a, b, "add");
    const Vec& x = a.value();
    const Vec& y = b.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape()->record(std::move(out), [ia, ib](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        accumulate(adj, ia, g);
        accumulate(adj, ib, g);
    });
}

Var sub(Var a, Var b) {
    require_same_size(a, b, "sub");
    const Vec& x = a.value();
    const Vec& y = b.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape()->record(std::move(out), [ia, ib](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        accumulate(adj, ia, g);
        Vec neg(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
        accumulate(adj, ib, neg);
    });
}

Var mul(Var a, Var b) {
    require_same_size(a, b, "mul");
    const Vec& x = a.value();
    const Vec& y = b.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.tape()->record(std::move(out), [ia, ib](const Tape& t, const Vec& g, std::vector<Vec>& adj) {
        const Vec& x = t.value_of(ia);
        const Vec& y = t.value_of(ib);
        Vec ga(g.size()), gb(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] = g[i] * y[i];
            gb[i] = g[i] * x[i];
        }
        accumulate(adj, ia, ga);
        accumulate(adj, ib, gb);
    });
}

Var affine(Var a, double scale, double shift) {
    const Vec& x = a.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale + shift;
    const std::size_t ia = a.id();
    return a.tape()->record(std::move(out), [ia, scale](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        Vec ga(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * scale;
        accumulate(adj, ia, ga);
    });
}

Var broadcast_add(Var a, Var s) {
    require_same_tape(a, s, "broadcast_add");
    if (s.size() != 1) throw DimensionError("broadcast_add: shift must be scalar", 1, s.size());
    const Vec& x = a.value();
    const double shift = s.value()[0];
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + shift;
    const std::size_t ia = a.id(), is = s.id();
    return a.tape()->record(std::move(out), [ia, is](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        accumulate(adj, ia, g);
        double total = 0.0;
        for (double v : g) total += v;
        accumulate(adj, is, Vec{total});
    });
}

Var tanh(Var a) {
    const Vec& x = a.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
    const std::size_t ia = a.id();
    Vec saved = out;
    return a.tape()->record(std::move(out), [ia, saved = std::move(saved)](const Tape&, const Vec& g,
                                                                              std::vector<Vec>& adj) {
        Vec ga(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * (1.0 - saved[i] * saved[i]);
        accumulate(adj, ia, ga);
    });
}

Var sigmoid(Var a) {
    const Vec& x = a.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
    const std::size_t ia = a.id();
    Vec saved = out;
    return a.tape()->record(std::move(out), [ia, saved = std::move(saved)](const Tape&, const Vec& g,
                                                                              std::vector<Vec>& adj) {
        Vec ga(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * saved[i] * (1.0 - saved[i]);
        accumulate(adj, ia, ga);
    });
}

Var square(Var a) {
    const Vec& x = a.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
    const std::size_t ia = a.id();
    return a.tape()->record(std::move(out), [ia](const Tape& t, const Vec& g, std::vector<Vec>& adj) {
        const Vec& x = t.value_of(ia);
        Vec ga(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = 2.0 * x[i] * g[i];
        accumulate(adj, ia, ga);
    });
}

Var abs(Var a) {
    const Vec& x = a.value();
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::fabs(x[i]);
    const std::size_t ia = a.id();
    return a.tape()->record(std::move(out), [ia](const Tape& t, const Vec& g, std::vector<Vec>& adj) {
        const Vec& x = t.value_of(ia);
        Vec ga(g.size());
        // Subgradient 0 at the kink.
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] = x[i] > 0 ? g[i] : (x[i] < 0 ? -g[i] : 0.0);
        accumulate(adj, ia, ga);
    });
}

// ---------------------------------------------------------------------------
// Reductions and reshaping

Var sum(Var a) {
    const Vec& x = a.value();
    double s = 0.0;
    for (double v : x) s += v;
    const std::size_t ia = a.id(), n = x.size();
    return a.tape()->record(Vec{s}, [ia, n](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        accumulate(adj, ia, Vec(n, g[0]));
    });
}

Var mean(Var a) {
    if (a.size() == 0) throw std::invalid_argument("mean: empty input");
    return affine(sum(a), 1.0 / static_cast<double>(a.size()));
}

Var dot(Var a, Var b) {
    require_same_size(a, b, "dot");
    return sum(mul(a, b));
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no parts");
    Tape* tape = parts.front().tape();
    Vec out;
    std::vector<std::pair<std::size_t, std::size_t>> layout;  // (id, size)
    for (Var p : parts) {
        require_same_tape(parts.front(), p, "concat");
        out.insert(out.end(), p.value().begin(), p.value().end());
        layout.emplace_back(p.id(), p.size());
    }
    return tape->record(std::move(out), [layout = std::move(layout)](const Tape&, const Vec& g,
                                                                      std::vector<Vec>& adj) {
        std::size_t off = 0;
        for (auto [id, n] : layout) {
            accumulate(adj, id, std::span<const double>(g.data() + off, n));
            off += n;
        }
    });
}

Var concat(Var a, Var b) {
    const Var parts[] = {a, b};
    return concat(std::span<const Var>(parts));
}

Var slice(Var a, std::size_t offset, std::size_t length) {
    if (offset + length > a.size()) throw DimensionError("slice", offset + length, a.size());
    const Vec& x = a.value();
    Vec out(x.begin() + static_cast<std::ptrdiff_t>(offset),
            x.begin() + static_cast<std::ptrdiff_t>(offset + length));
    const std::size_t ia = a.id(), n = x.size();
    return a.tape()->record(std::move(out), [ia, n, offset](const Tape&, const Vec& g, std::vector<Vec>& adj) {
        Vec ga(n, 0.0);
        std::copy(g.begin(), g.end(), ga.begin() + static_cast<std::ptrdiff_t>(offset));
        accumulate(adj, ia, ga);
    });
}

Var mean_of(Tape& tape, std::span<const Var> items, std::size_t dim) {
    if (items.empty()) return tape.constant(Vec(dim, 0.0));
    std::vector<std::size_t> ids;
    ids.reserve(items.size());
    for (Var v : items) {
        if (v.tape() != &tape) throw std::invalid_argument("mean_of: Var from another tape");
        if (v.size() != dim) throw DimensionError("mean_of", dim, v.size());
        ids.push_back(v.id());
    }
    // Each coordinate is summed in sorted order.
    Vec out(dim, 0.0);
    Vec column(items.size());
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < items.size(); ++j) column[j] = items[j].value()[i];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (double x : column) acc += x;
        out[i] = acc;
    }
    const double inv = 1.0 / static_cast<double>(items.size());
    for (double& x : out) x *= inv;
    return tape.record(std::move(out), [ids = std::move(ids), inv](const Tape&, const Vec& g,
                                                                    std::vector<Vec>& adj) {
        Vec share(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) share[i] = g[i] * inv;
        for (std::size_t id : ids) accumulate(adj, id, share);
    });
}

// ---------------------------------------------------------------------------
// Linear algebra

Vec linear_forward(std::span<const double> x, const Block& weight, const Block& bias) {
    if (x.size() != weight.cols()) throw DimensionError("linear: input vs weight columns", weight.cols(), x.size());
    if (bias.size() != weight.rows()) throw DimensionError("linear: bias vs weight rows", weight.rows(), bias.size());
    Vec out(weight.rows());
    const auto w = weight.values();
    const auto b = bias.values();
    for (std::size_t r = 0; r < weight.rows(); ++r) {
        double acc = b[r];
        const double* row = w.data() + r * weight.cols();
        for (std::size_t c = 0; c < weight.cols(); ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
    return out;
}

Var linear(Var x, Var weight, Var bias) {
    require_same_tape(x, weight, "linear");
    require_same_tape(x, bias, "linear");
    Tape* tape = x.tape();
    const std::size_t rows = tape->rows(weight), cols = tape->cols(weight);
    if (x.size() != cols) throw DimensionError("linear: input vs weight columns", cols, x.size());
    if (bias.size() != rows) throw DimensionError("linear: bias vs weight rows", rows, bias.size());
    const Vec& xv = x.value();
    const Vec& wv = weight.value();
    const Vec& bv = bias.value();
    Vec out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bv[r];
        const double* row = wv.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * xv[c];
        out[r] = acc;
    }
    const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
    return tape->record(std::move(out), [ix, iw, ib, rows, cols](const Tape& t, const Vec& g,
                                                                  std::vector<Vec>& adj) {
        const Vec& xv = t.value_of(ix);
        const Vec& wv = t.value_of(iw);
        Vec gx(cols, 0.0), gw(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const double gr = g[r];
            const double* row = wv.data() + r * cols;
            double* grow = gw.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                gx[c] += row[c] * gr;
                grow[c] = gr * xv[c];
            }
        }
        accumulate(adj, ix, gx);
        accumulate(adj, iw, gw);
        accumulate(adj, ib, g);
    });
}

Var linear(Var x, const ParamSet& params, const std::string& prefix) {
    Tape* tape = x.tape();
    return linear(x, tape->param(params, prefix + ".w"), tape->param(params, prefix + ".b"));
}

// ---------------------------------------------------------------------------
// Convolution

std::size_t receptive_field(std::size_t kernel_size, std::span<const std::size_t> dilations) {
    std::size_t rf = 1;
    for (std::size_t d : dilations) rf += (kernel_size - 1) * d;
    return rf;
}

Vec conv1d_dilated(std::span<const double> signal, std::span<const double> kernel, std::size_t dilation) {
    if (dilation == 0) throw std::invalid_argument("conv1d_dilated: dilation must be positive");
    if (kernel.empty()) throw std::invalid_argument("conv1d_dilated: empty kernel");
    const std::size_t span = (kernel.size() - 1) * dilation;
    if (signal.size() < span + 1) throw LengthError("conv1d_dilated", span + 1, signal.size());
    const std::size_t n = signal.size() - span;
    Vec out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < kernel.size(); ++j) acc += kernel[j] * signal[t + j * dilation];
        out[t] = acc;
    }
    return out;
}

Var conv1d_dilated(Var signal, Var kernel, std::size_t dilation) {
    require_same_tape(signal, kernel, "conv1d_dilated");
    Vec out = conv1d_dilated(std::span<const double>(signal.value()), std::span<const double>(kernel.value()),
                             dilation);
    const std::size_t is = signal.id(), ik = kernel.id();
    const std::size_t ns = signal.size(), nk = kernel.size();
    return signal.tape()->record(std::move(out), [is, ik, ns, nk, dilation](const Tape& t, const Vec& g,
                                                                            std::vector<Vec>& adj) {
        const Vec& s = t.value_of(is);
        const Vec& k = t.value_of(ik);
        Vec gs(ns, 0.0), gk(nk, 0.0);
        for (std::size_t tt = 0; tt < g.size(); ++tt) {
            for (std::size_t j = 0; j < nk; ++j) {
                gs[tt + j * dilation] += k[j] * g[tt];
                gk[j] += s[tt + j * dilation] * g[tt];
            }
        }
        accumulate(adj, is, gs);
        accumulate(adj, ik, gk);
    });
}

// ---------------------------------------------------------------------------
// Softmax

Vec softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    require_finite(logits, "softmax");
    const double m = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        z += out[i];
    }
    for (double& x : out) x /= z;
    return out;
}

Var softmax(Var logits) {
    Vec p = softmax(std::span<const double>(logits.value()));
    const std::size_t il = logits.id();
    Vec saved = p;
    return logits.tape()->record(std::move(p), [il, saved = std::move(saved)](const Tape&, const Vec& g,
                                                                                std::vector<Vec>& adj) {
        double gp = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gp += g[i] * saved[i];
        Vec gl(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gl[i] = saved[i] * (g[i] - gp);
        accumulate(adj, il, gl);
    });
}

Var log_softmax(Var logits) {
    const Vec& x = logits.value();
    if (x.empty()) throw std::invalid_argument("log_softmax: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    double z = 0.0;
    for (double v : x) z += std::exp(v - m);
    const double lse = m + std::log(z);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
    Vec p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = std::exp(out[i]);
    const std::size_t il = logits.id();
    return logits.tape()->record(std::move(out), [il, p = std::move(p)](const Tape&, const Vec& g,
                                                                         std::vector<Vec>& adj) {
        double gs = 0.0;
        for (double v : g) gs += v;
        Vec gl(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gl[i] = g[i] - p[i] * gs;
        accumulate(adj, il, gl);
    });
}

}  // namespace emgrl::diff
