// core/src/model.cpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tspl/model.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <utility>

#include "tspl/error.hpp"
#include "tspl/rng.hpp"

namespace tspl {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

ConstMapMat as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMapMat(t.data.data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MapMat as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MapMat(t.data.data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

std::size_t stage_input_channels(const ModelDescriptor& d, std::size_t i) {
  return i == 0 ? 1 : d.stages[i - 1].channels;
}

std::size_t stage_input_length(const ModelDescriptor& d, std::size_t i) {
  return i == 0 ? d.input_length : d.stage_length(i - 1);
}

void im2col(std::span<const double> x, std::size_t batch, std::size_t t_in,
            std::size_t c_in, const ConvStage& st, std::size_t t_out,
            std::vector<double>& cols) {
  const std::size_t width = st.kernel * c_in;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(st.kernel / 2);
  cols.assign(batch * t_out * width, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.data() + b * t_in * c_in;
    for (std::size_t o = 0; o < t_out; ++o) {
      double* row = cols.data() + (b * t_out + o) * width;
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(o * st.stride) - pad;
      for (std::size_t k = 0; k < st.kernel; ++k) {
        const std::ptrdiff_t t = start + static_cast<std::ptrdiff_t>(k);
        if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) continue;
        std::copy_n(xb + t * static_cast<std::ptrdiff_t>(c_in), c_in, row + k * c_in);
      }
    }
  }
}

void col2im(std::span<const double> dcols, std::size_t batch, std::size_t t_in,
            std::size_t c_in, const ConvStage& st, std::size_t t_out,
            std::vector<double>& dx) {
  const std::size_t width = st.kernel * c_in;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(st.kernel / 2);
  dx.assign(batch * t_in * c_in, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    double* xb = dx.data() + b * t_in * c_in;
    for (std::size_t o = 0; o < t_out; ++o) {
      const double* row = dcols.data() + (b * t_out + o) * width;
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(o * st.stride) - pad;
      for (std::size_t k = 0; k < st.kernel; ++k) {
        const std::ptrdiff_t t = start + static_cast<std::ptrdiff_t>(k);
        if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) continue;
        double* dst = xb + t * static_cast<std::ptrdiff_t>(c_in);
        const double* src = row + k * c_in;
        for (std::size_t c = 0; c < c_in; ++c) dst[c] += src[c];
      }
    }
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

}  // namespace

void ModelDescriptor::validate() const {
  if (input_length == 0) throw ValidationError("model: input length must be positive");
  if (stages.empty()) throw ValidationError("model: at least one conv stage required");
  if (hidden == 0) throw ValidationError("model: hidden width must be positive");
  if (num_classes != 10) throw ValidationError("model: output dimension must be 10");
  std::size_t len = input_length;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const ConvStage& s = stages[i];
    if (s.channels == 0 || s.kernel == 0 || s.stride == 0)
      throw ValidationError("model: stage " + std::to_string(i) +
                            " has a zero channels/kernel/stride");
    if (s.kernel % 2 == 0)
      throw ValidationError("model: stage " + std::to_string(i) +
                            " kernel must be odd");
    len = (len - 1) / s.stride + 1;
    if (len == 0) throw ValidationError("model: sequence vanishes at stage " + std::to_string(i));
  }
}

std::size_t ModelDescriptor::stage_length(std::size_t i) const {
  // Zero padding kernel/2 on both sides with odd kernels keeps
  // floor((n + 2p - k) / s) + 1 == floor((n - 1) / s) + 1.
  std::size_t len = input_length;
  for (std::size_t s = 0; s <= i; ++s) len = (len - 1) / stages.at(s).stride + 1;
  return len;
}

std::size_t ModelDescriptor::parameter_count() const {
  std::size_t n = 0;
  std::size_t c_in = 1;
  for (const ConvStage& s : stages) {
    n += s.channels * s.kernel * c_in + s.channels;
    c_in = s.channels;
  }
  n += hidden * c_in + hidden;
  n += num_classes * hidden + num_classes;
  return n;
}

std::size_t ClassifierModel::parameter_count() const {
  std::size_t n = 0;
  for (const NamedTensor& p : params) n += p.value.size();
  return n;
}

const Tensor& ClassifierModel::param(const std::string& name) const {
  for (const NamedTensor& p : params)
    if (p.name == name) return p.value;
  throw ValidationError("model: no parameter named " + name);
}

Tensor& ClassifierModel::param(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).param(name));
}

Gradients zero_gradients(const ClassifierModel& model) {
  Gradients g;
  g.reserve(model.params.size());
  for (const NamedTensor& p : model.params) g.push_back({p.name, Tensor(p.value.shape)});
  return g;
}

ClassifierModel init_model(const ModelDescriptor& descriptor, std::uint64_t seed) {
  descriptor.validate();
  ClassifierModel m;
  m.descriptor = descriptor;
  m.init_seed = seed;
  Rng rng(seed);

  auto add_layer = [&](const std::string& prefix, std::vector<std::size_t> wshape,
                       std::size_t fan_in) {
    Tensor w(std::move(wshape));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    Tensor b({w.shape[0]});
    m.params.push_back({prefix + ".weight", std::move(w)});
    m.params.push_back({prefix + ".bias", std::move(b)});
  };

  std::size_t c_in = 1;
  for (std::size_t i = 0; i < descriptor.stages.size(); ++i) {
    const ConvStage& s = descriptor.stages[i];
    add_layer("conv" + std::to_string(i), {s.channels, s.kernel, c_in}, s.kernel * c_in);
    c_in = s.channels;
  }
  add_layer("fc1", {descriptor.hidden, c_in}, c_in);
  add_layer("fc2", {descriptor.num_classes, descriptor.hidden}, descriptor.hidden);
  return m;
}

std::span<const double> forward(const ClassifierModel& model,
                                std::span<const double> batch,
                                std::size_t batch_size, ForwardCache& cache) {
  const ModelDescriptor& d = model.descriptor;
  if (batch_size == 0 || batch.size() != batch_size * d.input_length)
    throw ValidationError("forward: batch has " + std::to_string(batch.size()) +
                          " values, expected " + std::to_string(batch_size) + " x " +
                          std::to_string(d.input_length));
  const std::size_t n_stages = d.stages.size();
  cache.batch = batch_size;
  cache.model = &model;
  cache.model_version = model.version;
  cache.input.assign(batch.begin(), batch.end());
  cache.stage_cols.resize(n_stages);
  cache.stage_out.resize(n_stages);

  std::span<const double> x = cache.input;
  for (std::size_t i = 0; i < n_stages; ++i) {
    const ConvStage& st = d.stages[i];
    const std::size_t c_in = stage_input_channels(d, i);
    const std::size_t t_in = stage_input_length(d, i);
    const std::size_t t_out = d.stage_length(i);
    const std::size_t rows = batch_size * t_out;
    const std::size_t width = st.kernel * c_in;
    im2col(x, batch_size, t_in, c_in, st, t_out, cache.stage_cols[i]);

    const Tensor& w = model.params[2 * i].value;
    const Tensor& bias = model.params[2 * i + 1].value;
    std::vector<double>& out = cache.stage_out[i];
    out.resize(rows * st.channels);
    MapMat y(out.data(), static_cast<Eigen::Index>(rows),
             static_cast<Eigen::Index>(st.channels));
    ConstMapMat cols(cache.stage_cols[i].data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(width));
    y.noalias() = cols * as_matrix(w, st.channels, width).transpose();
    y.rowwise() += ConstMapVec(bias.data.data(), static_cast<Eigen::Index>(st.channels))
                       .transpose();
    relu_inplace(out);
    x = out;
  }

  const std::size_t c_last = d.stages.back().channels;
  const std::size_t t_last = d.stage_length(n_stages - 1);
  cache.pooled.assign(batch_size * c_last, 0.0);
  {
    const std::vector<double>& y = cache.stage_out.back();
    for (std::size_t b = 0; b < batch_size; ++b) {
      double* dst = cache.pooled.data() + b * c_last;
      for (std::size_t t = 0; t < t_last; ++t) {
        const double* src = y.data() + (b * t_last + t) * c_last;
        for (std::size_t c = 0; c < c_last; ++c) dst[c] += src[c];
      }
      const double inv = 1.0 / static_cast<double>(t_last);
      for (std::size_t c = 0; c < c_last; ++c) dst[c] *= inv;
    }
  }

  const Tensor& w1 = model.params[2 * n_stages].value;
  const Tensor& b1 = model.params[2 * n_stages + 1].value;
  const Tensor& w2 = model.params[2 * n_stages + 2].value;
  const Tensor& b2 = model.params[2 * n_stages + 3].value;
  const auto rows = static_cast<Eigen::Index>(batch_size);

  cache.hidden_pre.resize(batch_size * d.hidden);
  MapMat pre(cache.hidden_pre.data(), rows, static_cast<Eigen::Index>(d.hidden));
  pre.noalias() = ConstMapMat(cache.pooled.data(), rows, static_cast<Eigen::Index>(c_last)) *
                  as_matrix(w1, d.hidden, c_last).transpose();
  pre.rowwise() += ConstMapVec(b1.data.data(), static_cast<Eigen::Index>(d.hidden)).transpose();
  cache.hidden = cache.hidden_pre;
  relu_inplace(cache.hidden);

  cache.logits.resize(batch_size * d.num_classes);
  MapMat logits(cache.logits.data(), rows, static_cast<Eigen::Index>(d.num_classes));
  logits.noalias() =
      ConstMapMat(cache.hidden.data(), rows, static_cast<Eigen::Index>(d.hidden)) *
      as_matrix(w2, d.num_classes, d.hidden).transpose();
  logits.rowwise() +=
      ConstMapVec(b2.data.data(), static_cast<Eigen::Index>(d.num_classes)).transpose();
  return cache.logits;
}

void backward(const ClassifierModel& model, const ForwardCache& cache,
              std::span<const double> logit_grad, Gradients& grads) {
  if (cache.model != &model || cache.model_version != model.version)
    throw ValidationError("backward: forward cache is stale (model changed since forward)");
  const ModelDescriptor& d = model.descriptor;
  const std::size_t batch = cache.batch;
  if (logit_grad.size() != batch * d.num_classes)
    throw ValidationError("backward: logit gradient has wrong size");
  if (grads.size() != model.params.size()) grads = zero_gradients(model);

  const std::size_t n_stages = d.stages.size();
  const std::size_t c_last = d.stages.back().channels;
  const auto rows = static_cast<Eigen::Index>(batch);
  const auto hid = static_cast<Eigen::Index>(d.hidden);
  const auto ncls = static_cast<Eigen::Index>(d.num_classes);

  ConstMapMat dlogits(logit_grad.data(), rows, ncls);
  ConstMapMat hidden(cache.hidden.data(), rows, hid);
  const Tensor& w2 = model.params[2 * n_stages + 2].value;
  const Tensor& w1 = model.params[2 * n_stages].value;

  as_matrix(grads[2 * n_stages + 2].value, d.num_classes, d.hidden).noalias() =
      dlogits.transpose() * hidden;
  MapVec(grads[2 * n_stages + 3].value.data.data(), ncls) = dlogits.colwise().sum().transpose();

  RowMat dpre = dlogits * as_matrix(w2, d.num_classes, d.hidden);
  for (Eigen::Index i = 0; i < dpre.size(); ++i)
    if (!(cache.hidden_pre[static_cast<std::size_t>(i)] > 0.0)) dpre.data()[i] = 0.0;

  ConstMapMat pooled(cache.pooled.data(), rows, static_cast<Eigen::Index>(c_last));
  as_matrix(grads[2 * n_stages].value, d.hidden, c_last).noalias() = dpre.transpose() * pooled;
  MapVec(grads[2 * n_stages + 1].value.data.data(), hid) = dpre.colwise().sum().transpose();
  RowMat dpooled = dpre * as_matrix(w1, d.hidden, c_last);

  // Mean-pool backward spreads dpooled / T over time.
  const std::size_t t_last = d.stage_length(n_stages - 1);
  std::vector<double> dy(batch * t_last * c_last);
  const double inv = 1.0 / static_cast<double>(t_last);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < t_last; ++t)
      for (std::size_t c = 0; c < c_last; ++c)
        dy[(b * t_last + t) * c_last + c] = dpooled(static_cast<Eigen::Index>(b),
                                                    static_cast<Eigen::Index>(c)) * inv;

  std::vector<double> dx;
  for (std::size_t i = n_stages; i-- > 0;) {
    const ConvStage& st = d.stages[i];
    const std::size_t c_in = stage_input_channels(d, i);
    const std::size_t t_in = stage_input_length(d, i);
    const std::size_t t_out = d.stage_length(i);
    const std::size_t nrows = batch * t_out;
    const std::size_t width = st.kernel * c_in;
    const std::vector<double>& out = cache.stage_out[i];
    for (std::size_t j = 0; j < dy.size(); ++j)
      if (!(out[j] > 0.0)) dy[j] = 0.0;

    ConstMapMat dz(dy.data(), static_cast<Eigen::Index>(nrows),
                   static_cast<Eigen::Index>(st.channels));
    ConstMapMat cols(cache.stage_cols[i].data(), static_cast<Eigen::Index>(nrows),
                     static_cast<Eigen::Index>(width));
    as_matrix(grads[2 * i].value, st.channels, width).noalias() = dz.transpose() * cols;
    MapVec(grads[2 * i + 1].value.data.data(), static_cast<Eigen::Index>(st.channels)) =
        dz.colwise().sum().transpose();
    if (i == 0) break;

    std::vector<double> dcols(nrows * width);
    MapMat(dcols.data(), static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(width))
        .noalias() = dz * as_matrix(model.params[2 * i].value, st.channels, width);
    col2im(dcols, batch, t_in, c_in, st, t_out, dx);
    dy.swap(dx);
  }
}

std::span<const double> embeddings(const ForwardCache& cache) { return cache.hidden; }

}  // namespace tspl
