#include "graphmlp/nn.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace graphmlp {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;

double norm_cdf(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)); }
double norm_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}
}  // namespace

Tensor2 gelu(const Tensor2& x) {
    Tensor2 out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = x.data[i] * norm_cdf(x.data[i]);
    return out;
}

Tensor2 gelu_backward(const Tensor2& x, const Tensor2& g) {
    if (!x.same_shape(g))
        throw std::invalid_argument("gelu_backward: shape mismatch");
    Tensor2 out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double v = x.data[i];
        out.data[i] = g.data[i] * (norm_cdf(v) + v * norm_pdf(v));
    }
    return out;
}

LinearLayer::LinearLayer(std::size_t in, std::size_t out, bool bias)
    : W(in, out),
      b(out, 0.0),
      dW(in, out),
      db(out, 0.0),
      use_bias(bias) {}

Tensor2 LinearLayer::forward(const Tensor2& x) {
    if (x.cols != W.rows)
        throw std::invalid_argument("LinearLayer: input dim mismatch");
    x_cache_ = x;
    Tensor2 out = matmul(x, W);
    if (use_bias)
        for (std::size_t i = 0; i < out.rows; ++i)
            for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) += b[j];
    return out;
}

Tensor2 LinearLayer::backward(const Tensor2& g) {
    const Tensor2 gw = matmul(transpose(x_cache_), g);
    for (std::size_t i = 0; i < dW.data.size(); ++i) dW.data[i] += gw.data[i];
    if (use_bias)
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) db[j] += g.at(i, j);
    return matmul(g, transpose(W));
}

void LinearLayer::zero_grad() {
    std::fill(dW.data.begin(), dW.data.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
}

LayerNormLayer::LayerNormLayer(std::size_t dim)
    : scale(dim, 1.0), shift(dim, 0.0), dscale(dim, 0.0), dshift(dim, 0.0) {}

Tensor2 LayerNormLayer::forward(const Tensor2& x) {
    if (x.cols != scale.size())
        throw std::invalid_argument("LayerNormLayer: dim mismatch");
    const std::size_t D = x.cols;
    xhat_cache_ = Tensor2(x.rows, D);
    inv_std_cache_.assign(x.rows, 0.0);
    Tensor2 out(x.rows, D);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        double mu = 0.0;
        for (std::size_t j = 0; j < D; ++j) mu += r[j];
        mu /= static_cast<double>(D);
        double var = 0.0;
        for (std::size_t j = 0; j < D; ++j) var += (r[j] - mu) * (r[j] - mu);
        var /= static_cast<double>(D);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        inv_std_cache_[i] = inv_std;
        for (std::size_t j = 0; j < D; ++j) {
            const double xh = (r[j] - mu) * inv_std;
            xhat_cache_.at(i, j) = xh;
            out.at(i, j) = scale[j] * xh + shift[j];
        }
    }
    return out;
}

Tensor2 LayerNormLayer::backward(const Tensor2& g) {
    const std::size_t D = g.cols;
    Tensor2 gx(g.rows, D);
    for (std::size_t i = 0; i < g.rows; ++i) {
        double sum_gxh = 0.0;   // sum of dxhat
        double sum_gxx = 0.0;   // sum of dxhat * xhat
        for (std::size_t j = 0; j < D; ++j) {
            const double gj = g.at(i, j);
            const double xh = xhat_cache_.at(i, j);
            dscale[j] += gj * xh;
            dshift[j] += gj;
            const double dxh = gj * scale[j];
            sum_gxh += dxh;
            sum_gxx += dxh * xh;
        }
        const double inv_d = 1.0 / static_cast<double>(D);
        for (std::size_t j = 0; j < D; ++j) {
            const double dxh = g.at(i, j) * scale[j];
            const double xh = xhat_cache_.at(i, j);
            gx.at(i, j) = inv_std_cache_[i] *
                          (dxh - inv_d * sum_gxh - xh * inv_d * sum_gxx);
        }
    }
    return gx;
}

void LayerNormLayer::zero_grad() {
    std::fill(dscale.begin(), dscale.end(), 0.0);
    std::fill(dshift.begin(), dshift.end(), 0.0);
}

Tensor2 DropoutLayer::forward(const Tensor2& x, bool training, Rng& rng) {
    if (!training || rate == 0.0) {
        last_mask = Tensor2();
        return x;
    }
    const double keep = 1.0 - rate;
    const double inv_keep = 1.0 / keep;
    last_mask = Tensor2(x.rows, x.cols);
    Tensor2 out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double m = (rng.next_double() < keep) ? inv_keep : 0.0;
        last_mask.data[i] = m;
        out.data[i] = x.data[i] * m;
    }
    return out;
}

Tensor2 DropoutLayer::backward(const Tensor2& g) const {
    if (last_mask.data.empty()) return g;
    Tensor2 out(g.rows, g.cols);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        out.data[i] = g.data[i] * last_mask.data[i];
    return out;
}

GraphMlpModel::GraphMlpModel(std::size_t d, std::size_t hidden,
                             std::size_t num_classes, double dropout_rate,
                             bool bias)
    : fc0(d, hidden, bias),
      ln(hidden),
      head_z(hidden, hidden, bias),
      head_y(hidden, num_classes, bias) {
    drop.rate = dropout_rate;
}

GraphMlpOutput GraphMlpModel::forward(const Tensor2& x, bool training,
                                      Rng& rng) {
    a0_cache_ = fc0.forward(x);
    g_cache_ = gelu(a0_cache_);
    const Tensor2 normed = ln.forward(g_cache_);
    const Tensor2 h = drop.forward(normed, training, rng);
    GraphMlpOutput out;
    out.z = head_z.forward(h);
    out.y_logits = head_y.forward(out.z);
    return out;
}

void GraphMlpModel::backward(const Tensor2& grad_z, const Tensor2& grad_y) {
    Tensor2 gz = head_y.backward(grad_y);
    for (std::size_t i = 0; i < gz.data.size(); ++i)
        gz.data[i] += grad_z.data[i];
    const Tensor2 gh = head_z.backward(gz);
    const Tensor2 gnormed = drop.backward(gh);
    const Tensor2 gg = ln.backward(gnormed);
    const Tensor2 ga0 = gelu_backward(a0_cache_, gg);
    fc0.backward(ga0);
}

std::vector<ParamRef> GraphMlpModel::params() {
    return {
        {"fc0.W", &fc0.W.data, &fc0.dW.data},
        {"fc0.b", &fc0.b, &fc0.db},
        {"ln.scale", &ln.scale, &ln.dscale},
        {"ln.shift", &ln.shift, &ln.dshift},
        {"head_z.W", &head_z.W.data, &head_z.dW.data},
        {"head_z.b", &head_z.b, &head_z.db},
        {"head_y.W", &head_y.W.data, &head_y.dW.data},
        {"head_y.b", &head_y.b, &head_y.db},
    };
}

void GraphMlpModel::zero_grad() {
    fc0.zero_grad();
    ln.zero_grad();
    head_z.zero_grad();
    head_y.zero_grad();
}

GcnModel::GcnModel(std::size_t d, std::size_t hidden, std::size_t num_classes,
                   double dropout_rate, bool bias)
    : layer1(d, hidden, bias), layer2(hidden, num_classes, bias) {
    drop.rate = dropout_rate;
}

Tensor2 GcnModel::forward(const SparseMatrix& a_hat, const Tensor2& x,
                          bool training, Rng& rng) {
    if (static_cast<std::size_t>(a_hat.n) != x.rows)
        throw std::invalid_argument("GcnModel: adjacency/features mismatch");
    a_cache_ = &a_hat;
    x_cache_ = x;
    a0_cache_ = spmm(a_hat, matmul(x, layer1.W));
    if (layer1.use_bias)
        for (std::size_t i = 0; i < a0_cache_.rows; ++i)
            for (std::size_t j = 0; j < a0_cache_.cols; ++j)
                a0_cache_.at(i, j) += layer1.b[j];
    h_cache_ = drop.forward(gelu(a0_cache_), training, rng);
    Tensor2 logits = spmm(a_hat, matmul(h_cache_, layer2.W));
    if (layer2.use_bias)
        for (std::size_t i = 0; i < logits.rows; ++i)
            for (std::size_t j = 0; j < logits.cols; ++j)
                logits.at(i, j) += layer2.b[j];
    return logits;
}

void GcnModel::backward(const Tensor2& grad_logits) {
    // A_hat is symmetric, so grad wrt (A_hat M) pulls back through A_hat.
    if (layer2.use_bias)
        for (std::size_t i = 0; i < grad_logits.rows; ++i)
            for (std::size_t j = 0; j < grad_logits.cols; ++j)
                layer2.db[j] += grad_logits.at(i, j);
    const Tensor2 gv = spmm(*a_cache_, grad_logits);
    const Tensor2 gw2 = matmul(transpose(h_cache_), gv);
    for (std::size_t i = 0; i < layer2.dW.data.size(); ++i)
        layer2.dW.data[i] += gw2.data[i];
    const Tensor2 gh = matmul(gv, transpose(layer2.W));
    const Tensor2 ggelu = drop.backward(gh);
    const Tensor2 ga0 = gelu_backward(a0_cache_, ggelu);
    if (layer1.use_bias)
        for (std::size_t i = 0; i < ga0.rows; ++i)
            for (std::size_t j = 0; j < ga0.cols; ++j)
                layer1.db[j] += ga0.at(i, j);
    const Tensor2 gu = spmm(*a_cache_, ga0);
    const Tensor2 gw1 = matmul(transpose(x_cache_), gu);
    for (std::size_t i = 0; i < layer1.dW.data.size(); ++i)
        layer1.dW.data[i] += gw1.data[i];
}

std::vector<ParamRef> GcnModel::params() {
    return {
        {"layer1.W", &layer1.W.data, &layer1.dW.data},
        {"layer1.b", &layer1.b, &layer1.db},
        {"layer2.W", &layer2.W.data, &layer2.dW.data},
        {"layer2.b", &layer2.b, &layer2.db},
    };
}

void GcnModel::zero_grad() {
    layer1.zero_grad();
    layer2.zero_grad();
}

void glorot_init(LinearLayer& layer, Rng& rng) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.W.rows + layer.W.cols));
    for (double& w : layer.W.data) w = rng.uniform(-limit, limit);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
}

void init_params(GraphMlpModel& model, Rng& rng) {
    glorot_init(model.fc0, rng);
    std::fill(model.ln.scale.begin(), model.ln.scale.end(), 1.0);
    std::fill(model.ln.shift.begin(), model.ln.shift.end(), 0.0);
    glorot_init(model.head_z, rng);
    glorot_init(model.head_y, rng);
}

void init_params(GcnModel& model, Rng& rng) {
    glorot_init(model.layer1, rng);
    glorot_init(model.layer2, rng);
}

namespace {
constexpr char kMagic[8] = {'G', 'M', 'L', 'P', 'C', 'K', 'P', 'T'};

std::uint32_t crc_of(const std::string& s, std::uint32_t crc = 0) {
    return static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(s.data()),
              static_cast<uInt>(s.size())));
}

std::uint32_t crc_of(const std::vector<double>& v, std::uint32_t crc) {
    return static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(v.data()),
              static_cast<uInt>(v.size() * sizeof(double))));
}

void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::vector<ParamRef>& params,
                     const std::vector<ParamRef>& extra_state) {
    nlohmann::json meta;
    meta["format_version"] = 1;
    meta["kind"] = kind;
    auto describe = [](const std::vector<ParamRef>& refs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : refs)
            arr.push_back({{"name", p.name}, {"size", p.value->size()}});
        return arr;
    };
    meta["params"] = describe(params);
    meta["extra_state"] = describe(extra_state);
    const std::string meta_str = meta.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, meta_str.size());
    os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    std::uint32_t crc = crc_of(meta_str);
    for (const auto* group : {&params, &extra_state}) {
        for (const auto& p : *group) {
            os.write(reinterpret_cast<const char*>(p.value->data()),
                     static_cast<std::streamsize>(p.value->size() * sizeof(double)));
            crc = crc_of(*p.value, crc);
        }
    }
    write_u64(os, crc);
    if (!os) throw std::runtime_error("save_checkpoint: write failed: " + path);
}

void load_checkpoint(const std::string& path, const std::string& kind,
                     std::vector<ParamRef> params,
                     std::vector<ParamRef> extra_state) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    const std::uint64_t meta_len = read_u64(is);
    std::string meta_str(meta_len, '\0');
    is.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw std::runtime_error("load_checkpoint: truncated meta");
    const nlohmann::json meta = nlohmann::json::parse(meta_str);
    if (meta.at("kind").get<std::string>() != kind)
        throw std::runtime_error("load_checkpoint: checkpoint kind is '" +
                                 meta.at("kind").get<std::string>() +
                                 "', expected '" + kind + "'");
    auto check = [&](const nlohmann::json& desc, std::vector<ParamRef>& refs) {
        if (desc.size() != refs.size())
            throw std::runtime_error("load_checkpoint: parameter count mismatch");
        for (std::size_t i = 0; i < refs.size(); ++i) {
            if (desc[i].at("name").get<std::string>() != refs[i].name ||
                desc[i].at("size").get<std::size_t>() != refs[i].value->size())
                throw std::runtime_error(
                    "load_checkpoint: parameter mismatch at '" + refs[i].name + "'");
        }
    };
    check(meta.at("params"), params);
    check(meta.at("extra_state"), extra_state);
    std::uint32_t crc = crc_of(meta_str);
    for (auto* group : {&params, &extra_state}) {
        for (auto& p : *group) {
            is.read(reinterpret_cast<char*>(p.value->data()),
                    static_cast<std::streamsize>(p.value->size() * sizeof(double)));
            crc = crc_of(*p.value, crc);
        }
    }
    const std::uint64_t stored = read_u64(is);
    if (!is) throw std::runtime_error("load_checkpoint: truncated blob");
    if (stored != crc)
        throw std::runtime_error("load_checkpoint: checksum mismatch in " + path);
}

}  // namespace graphmlp
