// Copyright 2026 The acfm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acfm/cnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "acfm/error.hpp"
#include "acfm/random.hpp"

namespace acfm {
namespace {

constexpr char kModelMagic[4] = {'A', 'C', 'F', 'M'};
constexpr std::uint32_t kModelVersion = 1;

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

// Same-padded 3x3 convolution, stride 1. w is (3, 3, cin, cout).
template <typename T>
void conv_forward(const T* in, const Shape& s, const T* w, const T* b, std::size_t cout, T* out) {
  const std::size_t cin = s.channels;
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t x = 0; x < s.width; ++x) {
      T* o = out + (y * s.width + x) * cout;
      std::copy_n(b, cout, o);
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - 1;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.height)) continue;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - 1;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.width)) continue;
          const T* ip = in + (static_cast<std::size_t>(iy) * s.width + static_cast<std::size_t>(ix)) * cin;
          const T* wp = w + (ky * 3 + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const T v = ip[ci];
            const T* wr = wp + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += v * wr[co];
          }
        }
      }
    }
  }
}

// din may be null when the layer input needs no gradient.
template <typename T>
void conv_backward(const T* in, const Shape& s, const T* w, std::size_t cout, const T* dout,
                   T* dw, T* db, T* din) {
  const std::size_t cin = s.channels;
  if (din != nullptr) std::fill_n(din, s.size(), T{0});
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t x = 0; x < s.width; ++x) {
      const T* d = dout + (y * s.width + x) * cout;
      for (std::size_t co = 0; co < cout; ++co) db[co] += d[co];
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - 1;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.height)) continue;
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - 1;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.width)) continue;
          const std::size_t in_off =
              (static_cast<std::size_t>(iy) * s.width + static_cast<std::size_t>(ix)) * cin;
          const T* ip = in + in_off;
          const std::size_t w_off = (ky * 3 + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const T v = ip[ci];
            T* dwr = dw + w_off + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) dwr[co] += v * d[co];
          }
          if (din != nullptr) {
            T* dp = din + in_off;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const T* wr = w + w_off + ci * cout;
              T acc{0};
              for (std::size_t co = 0; co < cout; ++co) acc += wr[co] * d[co];
              dp[ci] += acc;
            }
          }
        }
      }
    }
  }
}

// 2x2 stride-2 max pool. Ties keep the first element in row-major order.
template <typename T>
void pool_forward(const T* in, const Shape& s, T* out, std::uint32_t* argmax) {
  const std::size_t oh = s.height / 2;
  const std::size_t ow = s.width / 2;
  const std::size_t c = s.channels;
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = ((2 * y) * s.width + 2 * x) * c + ch;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = ((2 * y + dy) * s.width + 2 * x + dx) * c + ch;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (y * ow + x) * c + ch;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void check_shapes(const ParamLayer<T>& layer, const std::vector<std::size_t>& weight_dims,
                  std::size_t bias_len) {
  if (layer.weight.dims != weight_dims || layer.weight.data.size() != product(weight_dims) ||
      layer.bias.dims != std::vector<std::size_t>{bias_len} || layer.bias.data.size() != bias_len) {
    throw Error(ErrorCode::kShapeMismatch, "parameter tensors of " + layer.name +
                                               " do not match the architecture");
  }
}

struct ParamShape {
  std::vector<std::size_t> weight;
  std::size_t bias = 0;
};

std::vector<ParamShape> param_shapes(const Architecture& arch) {
  const std::vector<Shape> shapes = arch.output_shapes();
  std::vector<ParamShape> out;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const Shape in = i == 0 ? arch.input : shapes[i - 1];
    const LayerSpec& l = arch.layers[i];
    if (l.kind == LayerKind::kConv3x3) {
      out.push_back({{3, 3, in.channels, l.units}, l.units});
    } else if (l.kind == LayerKind::kDense) {
      out.push_back({{l.units, in.size()}, l.units});
    }
  }
  return out;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

  bool at_end() const { return pos_ == bytes_.size(); }

  std::uint64_t read_le(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }

  std::string read_string(std::size_t len) {
    need(len);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kTruncated, "model file ends early");
  }

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_tensor(std::string& out, const std::string& name, const Tensor<float>& t) {
  out.push_back(static_cast<char>(name.size() & 0xFF));
  out.push_back(static_cast<char>((name.size() >> 8) & 0xFF));
  out += name;
  out.push_back(static_cast<char>(t.dims.size()));
  for (std::size_t d : t.dims) put_u32(out, static_cast<std::uint32_t>(d));
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void read_tensor(ByteReader& in, const std::string& expected_name, Tensor<float>& t) {
  const auto name_len = static_cast<std::size_t>(in.read_le(2));
  const std::string name = in.read_string(name_len);
  const auto rank = static_cast<std::size_t>(in.read_le(1));
  std::vector<std::size_t> dims(rank);
  for (std::size_t& d : dims) d = static_cast<std::size_t>(in.read_le(4));
  if (name != expected_name || dims != t.dims) {
    throw Error(ErrorCode::kShapeMismatch,
                "model file has tensor '" + name + "' where '" + expected_name + "' was expected");
  }
  for (float& v : t.data) {
    v = std::bit_cast<float>(static_cast<std::uint32_t>(in.read_le(4)));
    if (!std::isfinite(v)) throw Error(ErrorCode::kParse, "non-finite parameter in " + name);
  }
}

}  // namespace

Architecture Architecture::canonical(std::size_t channels) {
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kBadChannelCount,
                "input must have 1 or 3 channels, got " + std::to_string(channels));
  }
  Architecture a;
  a.input = {SpectrogramImage::kHeight, SpectrogramImage::kWidth, channels};
  a.layers = {
      {LayerKind::kConv3x3, 8, "conv1"}, {LayerKind::kRelu, 0, ""},  {LayerKind::kMaxPool2, 0, ""},
      {LayerKind::kConv3x3, 16, "conv2"}, {LayerKind::kRelu, 0, ""}, {LayerKind::kMaxPool2, 0, ""},
      {LayerKind::kConv3x3, 32, "conv3"}, {LayerKind::kRelu, 0, ""}, {LayerKind::kMaxPool2, 0, ""},
      {LayerKind::kFlatten, 0, ""},       {LayerKind::kDense, 64, "dense1"},
      {LayerKind::kRelu, 0, ""},          {LayerKind::kDense, kNumClasses, "dense2"},
  };
  return a;
}

Architecture Architecture::gradcheck() {
  Architecture a;
  a.input = {8, 8, 1};
  a.layers = {
      {LayerKind::kConv3x3, 2, "conv1"}, {LayerKind::kRelu, 0, ""},
      {LayerKind::kMaxPool2, 0, ""},     {LayerKind::kFlatten, 0, ""},
      {LayerKind::kDense, kNumClasses, "dense1"},
  };
  return a;
}

std::vector<Shape> Architecture::output_shapes() const {
  std::vector<Shape> shapes;
  Shape s = input;
  bool flat = false;
  if (s.size() == 0) throw Error(ErrorCode::kShapeMismatch, "empty input shape");
  for (const LayerSpec& l : layers) {
    switch (l.kind) {
      case LayerKind::kConv3x3:
        if (flat || l.units == 0) throw Error(ErrorCode::kShapeMismatch, "bad conv layer " + l.name);
        s.channels = l.units;
        break;
      case LayerKind::kRelu:
        break;
      case LayerKind::kMaxPool2:
        if (flat || s.height % 2 != 0 || s.width % 2 != 0) {
          throw Error(ErrorCode::kShapeMismatch, "max pool needs even spatial dims");
        }
        s.height /= 2;
        s.width /= 2;
        break;
      case LayerKind::kFlatten:
        s = {1, 1, s.size()};
        flat = true;
        break;
      case LayerKind::kDense:
        if (!flat || l.units == 0) throw Error(ErrorCode::kShapeMismatch, "dense layer needs flat input");
        s = {1, 1, l.units};
        break;
    }
    shapes.push_back(s);
  }
  if (shapes.empty()) throw Error(ErrorCode::kShapeMismatch, "architecture has no layers");
  return shapes;
}

std::size_t Architecture::num_param_layers() const {
  return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [](const LayerSpec& l) {
    return l.kind == LayerKind::kConv3x3 || l.kind == LayerKind::kDense;
  }));
}

bool Architecture::operator==(const Architecture& other) const {
  if (!(input == other.input) || layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != other.layers[i].kind || layers[i].units != other.layers[i].units) return false;
  }
  return true;
}

ClassLabel ClassProbabilities::argmax() const {
  return label_from_index(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
}

template <typename T>
Gradients<T> zero_like(const Network<T>& net) {
  Gradients<T> g = net.params;
  for (ParamLayer<T>& l : g) {
    std::fill(l.weight.data.begin(), l.weight.data.end(), T{0});
    std::fill(l.bias.data.begin(), l.bias.data.end(), T{0});
  }
  return g;
}

template <typename T>
Network<T> init_network(const Architecture& arch, std::uint64_t seed) {
  Network<T> net;
  net.arch = arch;
  net.seed = seed;
  const std::vector<ParamShape> shapes = param_shapes(arch);
  SplitMix64 rng(seed);
  std::size_t k = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& spec = arch.layers[i];
    if (spec.kind != LayerKind::kConv3x3 && spec.kind != LayerKind::kDense) continue;
    const ParamShape& ps = shapes[k++];
    ParamLayer<T> layer;
    layer.layer_index = i;
    layer.name = spec.name;
    layer.weight.dims = ps.weight;
    layer.weight.data.resize(product(ps.weight));
    layer.bias.dims = {ps.bias};
    layer.bias.data.assign(ps.bias, T{0});
    const std::size_t fan_in = spec.kind == LayerKind::kConv3x3 ? 9 * ps.weight[2] : ps.weight[1];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (T& w : layer.weight.data) w = static_cast<T>(stddev * rng.gaussian());
    net.params.push_back(std::move(layer));
  }
  return net;
}

template <typename T>
ForwardResult<T> forward(const Network<T>& net, std::span<const T> input) {
  const Architecture& arch = net.arch;
  if (input.size() != arch.input.size()) {
    throw Error(ErrorCode::kShapeMismatch, "input has " + std::to_string(input.size()) +
                                               " values, architecture expects " +
                                               std::to_string(arch.input.size()));
  }
  const std::vector<Shape> shapes = arch.output_shapes();
  const std::vector<ParamShape> pshapes = param_shapes(arch);
  if (net.params.size() != pshapes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "network has the wrong number of parameter layers");
  }

  ForwardResult<T> result;
  ForwardCache<T>& cache = result.cache;
  cache.inputs.resize(arch.layers.size());
  cache.argmax.resize(arch.layers.size());
  std::vector<T> current(input.begin(), input.end());
  Shape s = arch.input;
  std::size_t p = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    const Shape out_shape = shapes[i];
    std::vector<T> next(out_shape.size());
    switch (l.kind) {
      case LayerKind::kConv3x3: {
        const ParamLayer<T>& pl = net.params[p];
        check_shapes(pl, pshapes[p].weight, pshapes[p].bias);
        ++p;
        conv_forward(current.data(), s, pl.weight.data.data(), pl.bias.data.data(), l.units, next.data());
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t j = 0; j < next.size(); ++j) next[j] = current[j] > T{0} ? current[j] : T{0};
        break;
      case LayerKind::kMaxPool2:
        cache.argmax[i].resize(next.size());
        pool_forward(current.data(), s, next.data(), cache.argmax[i].data());
        break;
      case LayerKind::kFlatten:
        next = current;
        break;
      case LayerKind::kDense: {
        const ParamLayer<T>& pl = net.params[p];
        check_shapes(pl, pshapes[p].weight, pshapes[p].bias);
        ++p;
        const std::size_t n_in = current.size();
        for (std::size_t o = 0; o < l.units; ++o) {
          const T* wr = pl.weight.data.data() + o * n_in;
          T acc = pl.bias.data[o];
          for (std::size_t j = 0; j < n_in; ++j) acc += wr[j] * current[j];
          next[o] = acc;
        }
        break;
      }
    }
    cache.inputs[i] = std::move(current);
    current = std::move(next);
    s = out_shape;
  }
  result.logits = std::move(current);
  return result;
}

LossGrad loss_and_grad(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw Error(ErrorCode::kBadConfig, "label index out of range");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - max_logit);
  LossGrad out;
  out.loss = -((logits[label] - max_logit) - std::log(sum));
  out.dlogits.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.dlogits[k] = std::exp(logits[k] - max_logit) / sum - (k == label ? 1.0 : 0.0);
  }
  return out;
}

template <typename T>
void backward_accumulate(const Network<T>& net, const ForwardCache<T>& cache,
                         std::span<const double> dlogits, Gradients<T>& grads) {
  const Architecture& arch = net.arch;
  const std::vector<Shape> shapes = arch.output_shapes();
  if (dlogits.size() != shapes.back().size() || cache.inputs.size() != arch.layers.size() ||
      grads.size() != net.params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "backward called with a mismatched cache or gradients");
  }

  std::vector<T> d(dlogits.begin(), dlogits.end());
  std::size_t p = net.params.size();
  for (std::size_t i = arch.layers.size(); i-- > 0;) {
    const LayerSpec& l = arch.layers[i];
    const Shape in_shape = i == 0 ? arch.input : shapes[i - 1];
    const std::vector<T>& in = cache.inputs[i];
    // Nothing upstream of the first parameter layer needs a gradient.
    const bool need_input_grad = i > 0;
    std::vector<T> din;
    switch (l.kind) {
      case LayerKind::kConv3x3: {
        --p;
        const ParamLayer<T>& pl = net.params[p];
        if (need_input_grad) din.resize(in_shape.size());
        conv_backward(in.data(), in_shape, pl.weight.data.data(), l.units, d.data(),
                      grads[p].weight.data.data(), grads[p].bias.data.data(),
                      need_input_grad ? din.data() : nullptr);
        break;
      }
      case LayerKind::kRelu:
        din.resize(d.size());
        for (std::size_t j = 0; j < d.size(); ++j) din[j] = in[j] > T{0} ? d[j] : T{0};
        break;
      case LayerKind::kMaxPool2: {
        din.assign(in_shape.size(), T{0});
        const std::vector<std::uint32_t>& arg = cache.argmax[i];
        for (std::size_t j = 0; j < d.size(); ++j) din[arg[j]] += d[j];
        break;
      }
      case LayerKind::kFlatten:
        din = d;
        break;
      case LayerKind::kDense: {
        --p;
        const ParamLayer<T>& pl = net.params[p];
        const std::size_t n_in = in.size();
        T* dw = grads[p].weight.data.data();
        T* db = grads[p].bias.data.data();
        if (need_input_grad) din.assign(n_in, T{0});
        for (std::size_t o = 0; o < l.units; ++o) {
          const T g = d[o];
          db[o] += g;
          T* dwr = dw + o * n_in;
          for (std::size_t j = 0; j < n_in; ++j) dwr[j] += g * in[j];
          if (need_input_grad) {
            const T* wr = pl.weight.data.data() + o * n_in;
            for (std::size_t j = 0; j < n_in; ++j) din[j] += wr[j] * g;
          }
        }
        break;
      }
    }
    if (!need_input_grad) break;
    d = std::move(din);
  }
}

template <typename T>
AdamState<T> init_adam(const Network<T>& net) {
  return AdamState<T>{0, zero_like(net), zero_like(net)};
}

template <typename T>
void adam_step(Network<T>& net, const Gradients<T>& grads, AdamState<T>& state,
               const AdamParams& hyper) {
  if (grads.size() != net.params.size() || state.m.size() != net.params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "Adam state does not match the network");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<T>& param, const std::vector<T>& g, std::vector<T>& m,
                    std::vector<T>& v) {
    for (std::size_t j = 0; j < param.size(); ++j) {
      const double gj = g[j];
      const double mj = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * gj;
      const double vj = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double m_hat = mj / c1;
      const double v_hat = vj / c2;
      param[j] = static_cast<T>(param[j] - hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
    }
  };
  for (std::size_t k = 0; k < net.params.size(); ++k) {
    update(net.params[k].weight.data, grads[k].weight.data, state.m[k].weight.data, state.v[k].weight.data);
    update(net.params[k].bias.data, grads[k].bias.data, state.m[k].bias.data, state.v[k].bias.data);
  }
}

std::array<double, kNumClasses> softmax(std::span<const double> logits) {
  if (logits.size() != kNumClasses) throw Error(ErrorCode::kShapeMismatch, "expected 3 logits");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumClasses> p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(logits[k] - max_logit);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

ClassProbabilities predict(const Model& model, std::span<const float> pixels) {
  const ForwardResult<float> r = forward(model, pixels);
  const std::vector<double> wide(r.logits.begin(), r.logits.end());
  return ClassProbabilities{softmax(wide)};
}

ClassProbabilities predict(const Model& model, const SpectrogramImage& image) {
  if (image.channels != model.arch.input.channels) {
    throw Error(ErrorCode::kShapeMismatch, "image has " + std::to_string(image.channels) +
                                               " channels, model expects " +
                                               std::to_string(model.arch.input.channels));
  }
  return predict(model, std::span<const float>(image.pixels));
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::size_t channels = model.arch.input.channels;
  if (!(model.arch == Architecture::canonical(channels))) {
    throw Error(ErrorCode::kShapeMismatch, "only canonical architectures can be saved");
  }
  std::string out(kModelMagic, 4);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(channels));
  for (const ParamLayer<float>& l : model.params) {
    write_tensor(out, l.name + ".weight", l.weight);
    write_tensor(out, l.name + ".bias", l.bias);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  ByteReader in(std::vector<std::uint8_t>((std::istreambuf_iterator<char>(file)),
                                          std::istreambuf_iterator<char>()));
  std::string magic;
  try {
    magic = in.read_string(4);
  } catch (const Error&) {
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a model file");
  }
  if (magic != std::string(kModelMagic, 4)) {
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a model file");
  }
  const auto version = static_cast<std::uint32_t>(in.read_le(4));
  if (version != kModelVersion) {
    throw Error(ErrorCode::kVersionMismatch, "model format version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kModelVersion));
  }
  const auto channels = static_cast<std::size_t>(in.read_le(4));
  Model model = init_model(Architecture::canonical(channels), 0);
  for (ParamLayer<float>& l : model.params) {
    read_tensor(in, l.name + ".weight", l.weight);
    read_tensor(in, l.name + ".bias", l.bias);
  }
  if (!in.at_end()) throw Error(ErrorCode::kShapeMismatch, "trailing data after the last tensor");
  return model;
}

double grad_check(std::uint64_t seed, const GradCheckOptions& options) {
  Network<double> net = init_network<double>(Architecture::gradcheck(), seed);
  std::vector<double> input(net.arch.input.size(), 0.0);
  std::size_t label = 0;
  if (!options.zero_input) {
    SplitMix64 rng(derive_seed(seed, 1));
    for (double& v : input) v = rng.gaussian();
    label = static_cast<std::size_t>(seed % kNumClasses);
  }

  auto loss_of = [&](const Network<double>& n) {
    const ForwardResult<double> r = forward(n, std::span<const double>(input));
    return loss_and_grad(std::span<const double>(r.logits), label).loss;
  };

  const ForwardResult<double> r = forward(net, std::span<const double>(input));
  const LossGrad lg = loss_and_grad(std::span<const double>(r.logits), label);
  const Gradients<double> analytic = backward(net, r.cache, lg.dlogits);

  double worst = 0.0;
  auto check = [&](std::vector<double>& params, const std::vector<double>& grads) {
    for (std::size_t j = 0; j < params.size(); ++j) {
      const double saved = params[j];
      params[j] = saved + options.epsilon;
      const double plus = loss_of(net);
      params[j] = saved - options.epsilon;
      const double minus = loss_of(net);
      params[j] = saved;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = grads[j];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  };
  for (std::size_t k = 0; k < net.params.size(); ++k) {
    check(net.params[k].weight.data, analytic[k].weight.data);
    check(net.params[k].bias.data, analytic[k].bias.data);
  }
  return worst;
}

template Network<float> init_network<float>(const Architecture&, std::uint64_t);
template Network<double> init_network<double>(const Architecture&, std::uint64_t);
template Gradients<float> zero_like<float>(const Network<float>&);
template Gradients<double> zero_like<double>(const Network<double>&);
template ForwardResult<float> forward<float>(const Network<float>&, std::span<const float>);
template ForwardResult<double> forward<double>(const Network<double>&, std::span<const double>);
template void backward_accumulate<float>(const Network<float>&, const ForwardCache<float>&,
                                         std::span<const double>, Gradients<float>&);
template void backward_accumulate<double>(const Network<double>&, const ForwardCache<double>&,
                                          std::span<const double>, Gradients<double>&);
template AdamState<float> init_adam<float>(const Network<float>&);
template AdamState<double> init_adam<double>(const Network<double>&);
template void adam_step<float>(Network<float>&, const Gradients<float>&, AdamState<float>&,
                               const AdamParams&);
template void adam_step<double>(Network<double>&, const Gradients<double>&, AdamState<double>&,
                                const AdamParams&);

}  // namespace acfm
