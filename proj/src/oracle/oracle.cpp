#include "oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vmda::oracle {

Map to_map(const Tensor& t) {
  Map m(t.dim(0), Mat(t.dim(1), Vec(t.dim(2))));
  for (std::size_t c = 0; c < t.dim(0); ++c)
    for (std::size_t y = 0; y < t.dim(1); ++y)
      for (std::size_t x = 0; x < t.dim(2); ++x) m[c][y][x] = t.at(c, y, x);
  return m;
}

Tensor from_map(const Map& m) {
  Vec flat;
  for (const auto& ch : m)
    for (const auto& row : ch) flat.insert(flat.end(), row.begin(), row.end());
  return Tensor({m.size(), m[0].size(), m[0][0].size()}, std::move(flat));
}

Mat to_mat(const Tensor& t) {
  Mat m(t.dim(0), Vec(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j) m[i][j] = t.at(i, j);
  return m;
}

Vec softmax_direct(const Vec& x) {
  Vec e(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += (e[i] = std::exp(x[i]));
  for (auto& v : e) v /= sum;
  return e;
}

double sigmoid_direct(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double gelu_quadrature(double x) {
  // Phi(x) = 1/2 + integral_0^x phi(t) dt
  const int n = 20000;
  const double h = x / n;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = phi(0.0) + phi(x);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(i * h);
  return x * (0.5 + s * h / 3.0);
}

Map conv2d_naive(const Map& x, const Tensor& kernel, const Tensor& bias, std::size_t stride,
                 std::size_t padding) {
  const auto in_c = x.size(), h = x[0].size(), w = x[0][0].size();
  // explicit zero-padded copy
  Map padded(in_c, Mat(h + 2 * padding, Vec(w + 2 * padding, 0.0)));
  for (std::size_t c = 0; c < in_c; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) padded[c][y + padding][xx + padding] = x[c][y][xx];
  const auto out_c = kernel.dim(0), k = kernel.dim(2);
  const auto oh = (h + 2 * padding - k) / stride + 1, ow = (w + 2 * padding - k) / stride + 1;
  Map out(out_c, Mat(oh, Vec(ow)));
  for (std::size_t o = 0; o < out_c; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double acc = 0.0;
        for (std::size_t c = 0; c < in_c; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx)
              acc += kernel.at(o, c, ky, kx) * padded[c][y * stride + ky][xx * stride + kx];
        out[o][y][xx] = acc + bias[o];
      }
  return out;
}

Map avg_pool_naive(const Map& x, std::size_t window, std::size_t stride) {
  const auto oh = (x[0].size() - window) / stride + 1, ow = (x[0][0].size() - window) / stride + 1;
  Map out(x.size(), Mat(oh, Vec(ow)));
  for (std::size_t c = 0; c < x.size(); ++c)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx) {
        Vec vals;
        for (std::size_t ky = 0; ky < window; ++ky)
          for (std::size_t kx = 0; kx < window; ++kx) vals.push_back(x[c][y * stride + ky][xx * stride + kx]);
        double s = 0.0;
        for (double v : vals) s += v;
        out[c][y][xx] = s / static_cast<double>(vals.size());
      }
  return out;
}

Vec gap_naive(const Map& x) {
  Vec out;
  for (const auto& ch : x) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& row : ch)
      for (double v : row) {
        s += v;
        ++n;
      }
    out.push_back(s / static_cast<double>(n));
  }
  return out;
}

Vec matvec_naive(const Mat& w, const Vec& x, const Vec& b) {
  Vec out(w.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += w[r][c] * x[c];
    out[r] = s + b[r];
  }
  return out;
}

Mat matmul_naive(const Mat& a, const Mat& b) {
  Mat out(a.size(), Vec(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

namespace {

Map batch_norm_naive(const Map& x, const BatchNormParams& bn) {
  Map out = x;
  for (std::size_t c = 0; c < x.size(); ++c)
    for (auto& row : out[c])
      for (auto& v : row)
        v = bn.gamma[c] * (v - bn.running_mean[c]) / std::sqrt(bn.running_var[c] + bn.epsilon) +
            bn.beta[c];
  return out;
}

Map spatial_softmax_naive(const Map& x) {
  Map out = x;
  for (std::size_t c = 0; c < x.size(); ++c) {
    Vec flat;
    for (const auto& row : x[c]) flat.insert(flat.end(), row.begin(), row.end());
    const auto s = softmax_direct(flat);
    std::size_t i = 0;
    for (auto& row : out[c])
      for (auto& v : row) v = s[i++];
  }
  return out;
}

Mat linear_weight(const LinearParams& p) { return to_mat(p.weight); }

Vec to_vec(const Tensor& t) { return t.vec(); }

}  // namespace

FreqTrace frequency_select_trace(const Map& f, const freq::FreqSelectorParams& p) {
  FreqTrace tr;
  const auto c = f.size(), h = f[0].size(), w = f[0][0].size();
  const auto pooled = avg_pool_naive(f, p.pool_window, p.pool_window);
  const auto conv = conv2d_naive(pooled, p.decomp_conv.kernel, p.decomp_conv.bias,
                                 p.decomp_conv.stride, p.decomp_conv.padding);
  const auto small = spatial_softmax_naive(batch_norm_naive(conv, p.decomp_bn));
  const auto ph = small[0].size(), pw = small[0][0].size();
  tr.attention = Map(c, Mat(h, Vec(w)));
  tr.high = tr.low = tr.attention;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        // nearest source cell: floor(y * ph / h)
        const auto sy = std::min(y * ph / h, ph - 1), sx = std::min(x * pw / w, pw - 1);
        tr.attention[ch][y][x] = small[ch][sy][sx];
        tr.high[ch][y][x] = f[ch][y][x] * tr.attention[ch][y][x];
        tr.low[ch][y][x] = f[ch][y][x] - tr.high[ch][y][x];
      }
  Map sum = tr.high;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) sum[ch][y][x] += tr.low[ch][y][x];
  const auto g = matvec_naive(linear_weight(p.fc_global), gap_naive(sum), to_vec(p.fc_global.bias));
  const auto lh = matvec_naive(linear_weight(p.fc_high), g, to_vec(p.fc_high.bias));
  const auto ll = matvec_naive(linear_weight(p.fc_low), g, to_vec(p.fc_low.bias));
  for (std::size_t ch = 0; ch < c; ++ch) {
    tr.gate_high.push_back(sigmoid_direct(lh[ch]));
    tr.gate_low.push_back(sigmoid_direct(ll[ch]));
  }
  tr.fused = tr.high;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        tr.fused[ch][y][x] = tr.gate_high[ch] * tr.high[ch][y][x] + tr.gate_low[ch] * tr.low[ch][y][x];
  return tr;
}

Map mfm_trace(const Map& rgb, const Map& x, const fusion::MfmParams& p) {
  const auto f_rgb = conv2d_naive(rgb, p.conv_rgb.kernel, p.conv_rgb.bias, 1, p.conv_rgb.padding);
  const auto f_x = conv2d_naive(x, p.conv_x.kernel, p.conv_x.bias, 1, p.conv_x.padding);
  const auto a_rgb = spatial_softmax_naive(f_rgb), a_x = spatial_softmax_naive(f_x);
  const auto c = f_rgb.size(), h = f_rgb[0].size(), w = f_rgb[0][0].size();
  Map sum(c, Mat(h, Vec(w)));
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) sum[ch][y][xx] = f_rgb[ch][y][xx] + f_x[ch][y][xx];
  const auto g = gap_naive(sum);
  const auto logits = matvec_naive(linear_weight(p.fc_channel), g, to_vec(p.fc_channel.bias));
  Map combined(c, Mat(h, Vec(w)));
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double channel = g[ch] * sigmoid_direct(logits[ch]);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx)
        combined[ch][y][xx] = f_rgb[ch][y][xx] * a_rgb[ch][y][xx] + f_x[ch][y][xx] * a_x[ch][y][xx] + channel;
  }
  return conv2d_naive(combined, p.conv_out.kernel, p.conv_out.bias, 1, p.conv_out.padding);
}

Map fmfm_trace(const Map& rgb, const Map& x, const fusion::FmfmParams& p) {
  return mfm_trace(frequency_select_trace(rgb, p.freq_rgb).fused,
                   frequency_select_trace(x, p.freq_x).fused, p.mfm);
}

Mat patch_embed_naive(const Map& image, std::size_t patch, const Mat& w, const Vec& b) {
  Mat out;
  const auto gh = image[0].size() / patch, gw = image[0][0].size() / patch;
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx) {
      Vec flat;
      for (std::size_t c = 0; c < image.size(); ++c)
        for (std::size_t py = 0; py < patch; ++py)
          for (std::size_t px = 0; px < patch; ++px) flat.push_back(image[c][gy * patch + py][gx * patch + px]);
      out.push_back(matvec_naive(w, flat, b));
    }
  return out;
}

Mat attention_dense(const Mat& q, const Mat& k, const Mat& v, double scale) {
  Mat out;
  for (const auto& qi : q) {
    Vec scores;
    for (const auto& kj : k) {
      double d = 0.0;
      for (std::size_t t = 0; t < qi.size(); ++t) d += qi[t] * kj[t];
      scores.push_back(d * scale);
    }
    const auto w = softmax_direct(scores);
    Vec row(v[0].size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j)
      for (std::size_t t = 0; t < row.size(); ++t) row[t] += w[j] * v[j][t];
    out.push_back(row);
  }
  return out;
}

DensePool::DensePool(std::size_t short_cap, std::size_t long_cap, std::size_t perm_cap)
    : caps_{short_cap, long_cap, perm_cap} {}

void DensePool::init(const Vec& c0) {
  for (auto& t : tiers_) t = {c0};
}

void DensePool::refine(Mat& target, const Mat& source) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(source[0].size()));
  const auto delta = attention_dense(target, source, source, scale);
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = 0; j < target[i].size(); ++j) target[i][j] += delta[i][j];
}

void DensePool::update(const Vec& c) {
  tiers_[0].push_back(c);
  if (tiers_[0].size() > caps_[0]) tiers_[0].erase(tiers_[0].begin());
  refine(tiers_[1], tiers_[0]);
  refine(tiers_[2], tiers_[1]);
}

DensePool::Read DensePool::retrieve(const Vec& q) const {
  Read r;
  r.combined.assign(q.size(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto out = attention_dense({q}, tiers_[i], tiers_[i], 1.0);
    Vec scores;
    for (const auto& m : tiers_[i]) {
      double d = 0.0;
      for (std::size_t t = 0; t < q.size(); ++t) d += q[t] * m[t];
      scores.push_back(d);
    }
    r.weights[i] = softmax_direct(scores);
    r.reads[i] = out[0];
    for (std::size_t t = 0; t < q.size(); ++t) r.combined[t] += out[0][t];
  }
  return r;
}

Vec filter_naive(const Vec& c, const Mat& down_w, const Vec& down_b, const Mat& up_w,
                 const Vec& up_b) {
  auto mid = matvec_naive(down_w, c, down_b);
  for (auto& v : mid) v = gelu_quadrature(v);
  return matvec_naive(up_w, mid, up_b);
}

double iou_direct(const BoundingBox& a, const BoundingBox& b) {
  const double x1 = std::max(a.x, b.x), y1 = std::max(a.y, b.y);
  const double x2 = std::min(a.x + a.w, b.x + b.w), y2 = std::min(a.y + a.h, b.y + b.h);
  const double inter = (x2 > x1 && y2 > y1) ? (x2 - x1) * (y2 - y1) : 0.0;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

double giou_direct(const BoundingBox& a, const BoundingBox& b) {
  const double x1 = std::max(a.x, b.x), y1 = std::max(a.y, b.y);
  const double x2 = std::min(a.x + a.w, b.x + b.w), y2 = std::min(a.y + a.h, b.y + b.h);
  const double inter = (x2 > x1 && y2 > y1) ? (x2 - x1) * (y2 - y1) : 0.0;
  const double uni = a.w * a.h + b.w * b.h - inter;
  const double ex = std::max(a.x + a.w, b.x + b.w) - std::min(a.x, b.x);
  const double ey = std::max(a.y + a.h, b.y + b.h) - std::min(a.y, b.y);
  return inter / uni - (ex * ey - uni) / (ex * ey);
}

double iou_raster(const BoundingBox& a, const BoundingBox& b) {
  const auto lo = static_cast<long>(std::floor(std::min(a.x, b.x)));
  const auto hi = static_cast<long>(std::ceil(std::max(a.x + a.w, b.x + b.w)));
  const auto lo_y = static_cast<long>(std::floor(std::min(a.y, b.y)));
  const auto hi_y = static_cast<long>(std::ceil(std::max(a.y + a.h, b.y + b.h)));
  long in_a = 0, in_b = 0, both = 0;
  for (long y = lo_y; y < hi_y; ++y)
    for (long x = lo; x < hi; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool ia = cx > a.x && cx < a.x + a.w && cy > a.y && cy < a.y + a.h;
      const bool ib = cx > b.x && cx < b.x + b.w && cy > b.y && cy < b.y + b.h;
      in_a += ia;
      in_b += ib;
      both += ia && ib;
    }
  return static_cast<double>(both) / static_cast<double>(in_a + in_b - both);
}

double focal_direct(double p_t, double alpha, double gamma) {
  return -alpha * std::pow(1.0 - p_t, gamma) * std::log(p_t);
}

double regression_direct(const BoundingBox& b, const BoundingBox& g, double l1, double l2) {
  const double d = std::fabs(b.x - g.x) + std::fabs(b.y - g.y) + std::fabs(b.w - g.w) + std::fabs(b.h - g.h);
  return l1 * d + l2 * (1.0 - giou_direct(b, g));
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

MetricCounts metrics_bruteforce(const metrics::BoxSequence& res, const metrics::BoxSequence& gt,
                                double pr_threshold, double sr_threshold) {
  MetricCounts m;
  std::size_t visible = 0, close = 0, overlapping = 0, predicted = 0;
  double sum_pred = 0.0, sum_gt = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const double ov = (res[t] && gt[t]) ? iou_raster(*res[t], *gt[t]) : 0.0;
    if (res[t]) {
      ++predicted;
      sum_pred += ov;
    }
    if (!gt[t]) continue;
    ++visible;
    sum_gt += ov;
    if (!res[t]) continue;
    const double dx = (res[t]->x + res[t]->w / 2) - (gt[t]->x + gt[t]->w / 2);
    const double dy = (res[t]->y + res[t]->h / 2) - (gt[t]->y + gt[t]->h / 2);
    if (std::sqrt(dx * dx + dy * dy) < pr_threshold) ++close;
    if (ov > sr_threshold) ++overlapping;
  }
  if (visible) {
    m.pr = static_cast<double>(close) / static_cast<double>(visible);
    m.sr = static_cast<double>(overlapping) / static_cast<double>(visible);
    m.re = sum_gt / static_cast<double>(visible);
  }
  if (predicted) m.pre = sum_pred / static_cast<double>(predicted);
  if (m.pre + m.re > 0) m.f = 2 * m.pre * m.re / (m.pre + m.re);
  return m;
}

Tensor random_tensor(const Shape& shape, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(shape_numel(shape));
  for (auto& x : v) x = d(rng);
  return Tensor(shape, std::move(v));
}

ConvParams random_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k, Rng& rng) {
  ConvParams p;
  p.kernel = random_tensor({out_ch, in_ch, k, k}, rng, -0.5, 0.5);
  p.bias = random_tensor({out_ch}, rng, -0.1, 0.1);
  p.padding = k / 2;
  return p;
}

LinearParams random_linear(std::size_t out, std::size_t in, Rng& rng) {
  return {random_tensor({out, in}, rng, -0.5, 0.5), random_tensor({out}, rng, -0.1, 0.1)};
}

freq::FreqSelectorParams random_freq(std::size_t channels, std::size_t window, std::size_t k, Rng& rng) {
  freq::FreqSelectorParams p;
  p.decomp_conv = random_conv(channels, channels, k, rng);
  p.decomp_bn.gamma = random_tensor({channels}, rng, 0.5, 1.5);
  p.decomp_bn.beta = random_tensor({channels}, rng, -0.2, 0.2);
  p.decomp_bn.running_mean = random_tensor({channels}, rng, -0.2, 0.2);
  p.decomp_bn.running_var = random_tensor({channels}, rng, 0.5, 2.0);
  p.pool_window = window;
  p.fc_global = random_linear(channels, channels, rng);
  p.fc_high = random_linear(channels, channels, rng);
  p.fc_low = random_linear(channels, channels, rng);
  return p;
}

fusion::MfmParams random_mfm(std::size_t channels, std::size_t k, Rng& rng) {
  return {random_conv(channels, channels, k, rng), random_conv(channels, channels, k, rng),
          random_linear(channels, channels, rng), random_conv(channels, channels, k, rng)};
}

fusion::FmfmParams random_fmfm(std::size_t channels, std::size_t window, std::size_t k, Rng& rng) {
  return {random_freq(channels, window, k, rng), random_freq(channels, window, k, rng),
          random_mfm(channels, k, rng)};
}

}  // namespace vmda::oracle
