// Python bindings. Tensors cross the boundary as float64 numpy arrays (copied).

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oracle/selftest.hpp"
#include "vmda/errors.hpp"
#include "vmda/freq_selector.hpp"
#include "vmda/fusion.hpp"
#include "vmda/losses.hpp"
#include "vmda/memory.hpp"
#include "vmda/metrics.hpp"
#include "vmda/ops.hpp"
#include "vmda/run.hpp"
#include "vmda/synthgen.hpp"

namespace py = pybind11;
using namespace vmda;

namespace pybind11::detail {

template <>
struct type_caster<Tensor> {
  PYBIND11_TYPE_CASTER(Tensor, const_name("numpy.ndarray"));

  bool load(handle src, bool convert) {
    if (!convert && !array_t<double>::check_(src)) return false;
    auto arr = array_t<double, array::c_style | array::forcecast>::ensure(src);
    if (!arr || arr.ndim() == 0) return false;
    Shape shape(arr.shape(), arr.shape() + arr.ndim());
    value = Tensor(std::move(shape), std::vector<double>(arr.data(), arr.data() + arr.size()));
    return true;
  }

  static handle cast(const Tensor& t, return_value_policy, handle) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    array_t<double> out(shape);
    std::copy(t.vec().begin(), t.vec().end(), out.mutable_data());
    return out.release();
  }
};

}  // namespace pybind11::detail

namespace {

py::tuple box_tuple(const BoundingBox& b) { return py::make_tuple(b.x, b.y, b.w, b.h); }

py::dict report_dict(const metrics::Report& r) {
  py::dict d;
  d["frames"] = r.frames;
  d["pr_threshold"] = r.pr_threshold;
  d["sr_threshold"] = r.sr_threshold;
  d["precision_rate"] = r.precision_rate;
  d["success_rate"] = r.success_rate;
  d["success_auc"] = r.success_auc;
  d["precision"] = r.long_term.precision;
  d["recall"] = r.long_term.recall;
  d["f_score"] = r.long_term.f_score;
  d["degenerate"] = r.long_term.degenerate;
  return d;
}

Tensor stack(const std::vector<Frame>& frames, bool aux) {
  std::vector<double> data;
  for (const auto& f : frames) {
    const auto& t = aux ? f.aux : f.rgb;
    data.insert(data.end(), t.vec().begin(), t.vec().end());
  }
  Shape shape{frames.size()};
  const auto& first = aux ? frames.front().aux : frames.front().rgb;
  shape.insert(shape.end(), first.shape().begin(), first.shape().end());
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

PYBIND11_MODULE(_vmda, m) {
  m.doc() = "Multi-modal tracking adapters: numeric kernels, fusion, memory pool, losses, metrics";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  // ---- kernels
  m.def("softmax", &ops::softmax, py::arg("x"), py::arg("axis"));
  m.def("spatial_softmax", &ops::spatial_softmax);
  m.def(
      "conv2d",
      [](const Tensor& x, const Tensor& kernel, const Tensor& bias, std::size_t stride, std::size_t padding) {
        return ops::conv2d(x, ConvParams{kernel, bias, stride, padding});
      },
      py::arg("x"), py::arg("kernel"), py::arg("bias"), py::arg("stride") = 1, py::arg("padding") = 0);
  m.def("avg_pool2d", &ops::avg_pool2d, py::arg("x"), py::arg("window"), py::arg("stride"));
  m.def("global_avg_pool", &ops::global_avg_pool);
  m.def(
      "linear", [](const Tensor& x, const Tensor& w, const Tensor& b) { return ops::linear(x, {w, b}); },
      py::arg("x"), py::arg("weight"), py::arg("bias"));
  m.def("sigmoid", py::vectorize(static_cast<double (*)(double)>(&ops::sigmoid)));
  m.def("gelu", py::vectorize(static_cast<double (*)(double)>(&ops::gelu)));

  // ---- parameter structs
  py::class_<ConvParams>(m, "ConvParams")
      .def(py::init([](Tensor k, Tensor b, std::size_t s, std::size_t p) { return ConvParams{k, b, s, p}; }),
           py::arg("kernel"), py::arg("bias"), py::arg("stride") = 1, py::arg("padding") = 0)
      .def_readwrite("kernel", &ConvParams::kernel)
      .def_readwrite("bias", &ConvParams::bias)
      .def_readwrite("stride", &ConvParams::stride)
      .def_readwrite("padding", &ConvParams::padding);
  py::class_<BatchNormParams>(m, "BatchNormParams")
      .def(py::init([](Tensor g, Tensor b, Tensor mean, Tensor var, double eps) {
             return BatchNormParams{g, b, mean, var, eps};
           }),
           py::arg("gamma"), py::arg("beta"), py::arg("running_mean"), py::arg("running_var"),
           py::arg("epsilon") = 1e-5)
      .def_readwrite("gamma", &BatchNormParams::gamma)
      .def_readwrite("beta", &BatchNormParams::beta)
      .def_readwrite("running_mean", &BatchNormParams::running_mean)
      .def_readwrite("running_var", &BatchNormParams::running_var)
      .def_readwrite("epsilon", &BatchNormParams::epsilon);
  py::class_<LinearParams>(m, "LinearParams")
      .def(py::init([](Tensor w, Tensor b) { return LinearParams{w, b}; }), py::arg("weight"), py::arg("bias"))
      .def_readwrite("weight", &LinearParams::weight)
      .def_readwrite("bias", &LinearParams::bias);

  py::class_<freq::FreqSelectorParams>(m, "FreqSelectorParams")
      .def_static("neutral", &freq::neutral_params, py::arg("channels"), py::arg("pool_window") = 2)
      .def_static("zeros", &freq::zero_params, py::arg("channels"), py::arg("pool_window") = 2)
      .def_readwrite("decomp_conv", &freq::FreqSelectorParams::decomp_conv)
      .def_readwrite("decomp_bn", &freq::FreqSelectorParams::decomp_bn)
      .def_readwrite("pool_window", &freq::FreqSelectorParams::pool_window)
      .def_readwrite("fc_global", &freq::FreqSelectorParams::fc_global)
      .def_readwrite("fc_high", &freq::FreqSelectorParams::fc_high)
      .def_readwrite("fc_low", &freq::FreqSelectorParams::fc_low)
      .def("validate", &freq::FreqSelectorParams::validate);
  py::class_<fusion::MfmParams>(m, "MfmParams")
      .def_static("zeros", &fusion::zero_mfm, py::arg("channels"), py::arg("kernel") = 1)
      .def_readwrite("conv_rgb", &fusion::MfmParams::conv_rgb)
      .def_readwrite("conv_x", &fusion::MfmParams::conv_x)
      .def_readwrite("fc_channel", &fusion::MfmParams::fc_channel)
      .def_readwrite("conv_out", &fusion::MfmParams::conv_out);
  py::class_<fusion::FmfmParams>(m, "FmfmParams")
      .def_static("zeros", &fusion::zero_fmfm, py::arg("channels"), py::arg("pool_window") = 2,
                  py::arg("kernel") = 1)
      .def_readwrite("freq_rgb", &fusion::FmfmParams::freq_rgb)
      .def_readwrite("freq_x", &fusion::FmfmParams::freq_x)
      .def_readwrite("mfm", &fusion::FmfmParams::mfm);

  // ---- visual adapter
  m.def(
      "decompose",
      [](const Tensor& f, const freq::FreqSelectorParams& p) {
        auto pair = freq::decompose(f, p);
        return py::make_tuple(pair.high, pair.low);
      },
      "(high, low) frequency components");
  m.def("frequency_select", &freq::frequency_select);
  m.def("mfm", &fusion::mfm);
  m.def("fmfm", &fusion::fmfm);

  // ---- memory adapter
  py::class_<MemoryConfig>(m, "MemoryConfig")
      .def(py::init([](std::size_t dim, std::size_t s, std::size_t l, std::size_t p, std::size_t ls, std::size_t ps,
                       bool renorm) { return MemoryConfig{dim, s, l, p, ls, ps, renorm}; }),
           py::arg("dim") = 768, py::arg("short_capacity") = 8, py::arg("long_capacity") = 8,
           py::arg("permanent_capacity") = 3, py::arg("long_stride") = 1, py::arg("permanent_stride") = 1,
           py::arg("renormalize") = false)
      .def_readwrite("dim", &MemoryConfig::dim)
      .def_readwrite("short_capacity", &MemoryConfig::short_capacity)
      .def_readwrite("long_capacity", &MemoryConfig::long_capacity)
      .def_readwrite("permanent_capacity", &MemoryConfig::permanent_capacity);
  py::class_<FilterParams>(m, "FilterParams")
      .def(py::init([](LinearParams down, LinearParams up, std::size_t ratio) { return FilterParams{down, up, ratio}; }),
           py::arg("down"), py::arg("up"), py::arg("ratio"))
      .def_static("identity", &identity_filter)
      .def_static("zeros", &zero_filter, py::arg("dim"), py::arg("ratio") = 4)
      .def_readwrite("down", &FilterParams::down)
      .def_readwrite("up", &FilterParams::up)
      .def_readwrite("ratio", &FilterParams::ratio);
  py::class_<MemoryPool>(m, "MemoryPool")
      .def(py::init<MemoryConfig, FilterParams>(), py::arg("config"), py::arg("filter"))
      .def("init", &MemoryPool::init)
      .def("push_short", &MemoryPool::push_short)
      .def("update", &MemoryPool::update)
      .def("retrieve", &MemoryPool::retrieve)
      .def("retrieve_detail",
           [](const MemoryPool& p, const Tensor& q) {
             const auto r = p.retrieve_detail(q);
             py::dict d;
             d["weights"] = py::make_tuple(r.weights[0], r.weights[1], r.weights[2]);
             d["reads"] = py::make_tuple(r.reads[0], r.reads[1], r.reads[2]);
             d["combined"] = r.combined;
             return d;
           })
      .def("filter", &MemoryPool::filter)
      .def("sizes", &MemoryPool::sizes)
      .def("tier", [](const MemoryPool& p, int i) {
        if (i < 0 || i > 2) throw ArgumentError("tier index must be 0, 1 or 2");
        return p.bank(static_cast<Tier>(i)).matrix();
      }, "stacked tokens of tier 0 (short), 1 (long) or 2 (permanent)")
      .def_property_readonly("update_count", &MemoryPool::update_count);

  // ---- boxes, losses, metrics
  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def(py::init([](py::tuple t) {
        if (t.size() != 4) throw ArgumentError("a box needs (x, y, w, h)");
        return BoundingBox{t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>(), t[3].cast<double>()};
      }))
      .def_readwrite("x", &BoundingBox::x)
      .def_readwrite("y", &BoundingBox::y)
      .def_readwrite("w", &BoundingBox::w)
      .def_readwrite("h", &BoundingBox::h)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__iter__", [](const BoundingBox& b) { return py::iter(box_tuple(b)); })
      .def("__repr__", [](const BoundingBox& b) { return py::str("BoundingBox{}").format(box_tuple(b)); });
  py::implicitly_convertible<py::tuple, BoundingBox>();

  m.def("iou", &iou);
  m.def("giou", &giou);
  m.def(
      "focal_loss",
      [](std::vector<double> p, std::vector<int> labels, double alpha, double gamma) {
        return losses::focal_loss(p, labels, {alpha, gamma, 5, 2});
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("alpha") = 0.25, py::arg("gamma") = 2.0);
  m.def(
      "regression_loss",
      [](const BoundingBox& b, const BoundingBox& g, double l1, double l2) {
        return losses::regression_loss(b, g, {0.25, 2, l1, l2});
      },
      py::arg("predicted"), py::arg("truth"), py::arg("lambda1") = 5.0, py::arg("lambda2") = 2.0);
  m.def(
      "regression_gradient",
      [](const BoundingBox& b, const BoundingBox& g, double l1, double l2) {
        const auto r = losses::regression_gradient(b, g, {0.25, 2, l1, l2});
        return py::make_tuple(r.d, r.smooth);
      },
      py::arg("predicted"), py::arg("truth"), py::arg("lambda1") = 5.0, py::arg("lambda2") = 2.0,
      "(d/dx, d/dy, d/dw, d/dh) and per-component smoothness flags");
  m.def(
      "focal_gradient",
      [](double p_t, double alpha, double gamma) { return losses::focal_gradient(p_t, {alpha, gamma, 5, 2}); },
      py::arg("p_t"), py::arg("alpha") = 0.25, py::arg("gamma") = 2.0);

  m.def("precision_rate", &metrics::precision_rate, py::arg("res"), py::arg("gt"),
        py::arg("threshold") = metrics::kDefaultPrThreshold);
  m.def("success_rate", &metrics::success_rate, py::arg("res"), py::arg("gt"),
        py::arg("iou_threshold") = metrics::kDefaultSrThreshold);
  m.def("success_auc", &metrics::success_auc);
  m.def("evaluate",
        [](const metrics::BoxSequence& res, const metrics::BoxSequence& gt, double pr, double sr) {
          return report_dict(metrics::evaluate(res, gt, pr, sr));
        },
        py::arg("res"), py::arg("gt"), py::arg("pr_threshold") = metrics::kDefaultPrThreshold,
        py::arg("sr_threshold") = metrics::kDefaultSrThreshold);

  // ---- synthetic data and runs
  m.def("default_config_text", &default_config_text);
  m.def(
      "generate",
      [](const std::string& config_text, std::size_t index) {
        const auto cfg = parse_run_config(config_text);
        cfg.validate();
        const auto seq = synth::generate(cfg.scene_for(index));
        py::dict d;
        d["rgb"] = stack(seq.frames, false);
        d["aux"] = stack(seq.frames, true);
        d["ground_truth"] = seq.ground_truth;
        return d;
      },
      py::arg("config_text"), py::arg("index") = 0,
      "synthetic sequence: rgb and aux as (T, C, H, W) arrays plus per-frame boxes (None when occluded)");
  m.def(
      "run",
      [](const std::string& config_text, const std::filesystem::path& output_dir, std::size_t jobs) {
        auto cfg = parse_run_config(config_text);
        cfg.output_dir = output_dir;
        std::vector<SequenceResult> results;
        {
          py::gil_scoped_release release;
          results = execute_run(cfg, jobs);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d = report_dict(r.report);
          d["name"] = r.name;
          d["predictions"] = r.predictions;
          d["memory_sizes"] = r.final_memory_sizes;
          out.append(d);
        }
        return out;
      },
      py::arg("config_text"), py::arg("output_dir"), py::arg("jobs") = 1);
  m.def("selftest", [] {
    py::list out;
    for (const auto& o : selftest::run_all()) out.append(py::make_tuple(o.name, o.passed, o.detail));
    return out;
  });
}
