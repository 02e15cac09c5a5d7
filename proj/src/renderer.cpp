// Copyright 2026 planetnerf contributors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "planetnerf/renderer.hpp"

#include <cmath>
#include <thread>

namespace planetnerf {

RaySamples sample_along_ray(const Ray& ray, int n_samples, SampleMode mode, std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  if (!(ray.t_near < ray.t_far)) throw ValidationError("ray interval empty: t_near >= t_far");
  const double span = ray.t_far - ray.t_near;
  const double bin = span / n_samples;

  RaySamples s;
  s.t.resize(n_samples);
  if (mode == SampleMode::kUniform) {
    for (int i = 0; i < n_samples; ++i) s.t[i] = ray.t_near + (i + 0.5) * bin;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n_samples; ++i) s.t[i] = ray.t_near + (i + u(rng)) * bin;
  }
  s.delta.resize(n_samples);
  for (int i = 0; i + 1 < n_samples; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
  s.delta[n_samples - 1] = bin;  // capped final delta
  s.positions.resize(3, n_samples);
  for (int i = 0; i < n_samples; ++i) s.positions.col(i) = ray.point_at(s.t[i]);
  return s;
}

RenderedPixel compose_color(const SampleSlice& samples, const Eigen::VectorXd& deltas,
                            const Eigen::VectorXd& t, double t_near, double t_far,
                            double beta_min, double eps) {
  const int n = static_cast<int>(deltas.size());
  RenderedPixel px;
  double transmittance = 1.0;
  double t_acc = 0.0;
  double beta_acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = samples.sigma[i] * deltas[i];
    const double alpha = 1.0 - std::exp(-a);
    const double w = transmittance * alpha;
    const double s = samples.shading[i];
    for (int ch = 0; ch < 3; ++ch) {
      const double c =
          samples.season(ch, i) * samples.albedo(ch, i) * (s + (1.0 - s) * samples.sky(ch, i));
      px.color[ch] += w * c;
    }
    t_acc += w * t[i];
    beta_acc += w * samples.beta[i];
    px.opacity += w;
    transmittance *= std::exp(-a);
  }
  px.beta = beta_acc + beta_min;
  px.t_mean = px.opacity < eps ? 0.5 * (t_near + t_far) : t_acc / std::max(px.opacity, eps);
  return px;
}

ComposeBackward compose_color_backward(const SampleSlice& samples, const Eigen::VectorXd& deltas,
                                       const Eigen::Vector3d& d_color, double d_beta_composite) {
  const int n = static_cast<int>(deltas.size());
  ComposeBackward g;
  g.d_sigma.setZero(n);
  g.d_albedo.setZero(3, n);
  g.d_shading.setZero(n);
  g.d_sky.setZero(3, n);
  g.d_beta.setZero(n);
  g.d_season.setZero(3, n);

  Eigen::VectorXd w(n), trans_next(n), g_w(n);
  double transmittance = 1.0;
  for (int i = 0; i < n; ++i) {
    const double a = samples.sigma[i] * deltas[i];
    const double alpha = 1.0 - std::exp(-a);
    w[i] = transmittance * alpha;
    transmittance *= std::exp(-a);
    trans_next[i] = transmittance;

    const double s = samples.shading[i];
    double gw = samples.beta[i] * d_beta_composite;
    double ds = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      const double q = s + (1.0 - s) * samples.sky(ch, i);
      const double c = samples.season(ch, i) * samples.albedo(ch, i) * q;
      gw += c * d_color[ch];
      const double dc = w[i] * d_color[ch];
      g.d_albedo(ch, i) = dc * samples.season(ch, i) * q;
      g.d_season(ch, i) = dc * samples.albedo(ch, i) * q;
      const double dq = dc * samples.season(ch, i) * samples.albedo(ch, i);
      ds += dq * (1.0 - samples.sky(ch, i));
      g.d_sky(ch, i) = dq * (1.0 - s);
    }
    g_w[i] = gw;
    g.d_shading[i] = ds;
    g.d_beta[i] = w[i] * d_beta_composite;
  }
  // d/d(sigma_i delta_i): own-weight term minus the suffix of downstream
  // weights attenuated by this sample.
  double suffix = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double da = trans_next[i] * g_w[i] - suffix;
    g.d_sigma[i] = deltas[i] * da;
    suffix += w[i] * g_w[i];
  }
  return g;
}

namespace {

SampleSlice slice_outputs(const FieldOutputs& out, int offset, int n) {
  return SampleSlice{out.sigma.segment(offset, n),
                     out.shading.segment(offset, n),
                     out.beta.segment(offset, n),
                     out.albedo.middleCols(offset, n),
                     out.sky.middleCols(offset, n),
                     out.season.middleCols(offset, n)};
}

}  // namespace

RenderResult render_image(const FieldParams& params, const SeasonGate& gate, const Camera& camera,
                          int month_index, const Eigen::Vector3d& d_sun, int image_index,
                          const RenderInputSpec& input_spec, const LocalFrame& frame,
                          const SceneNormalization& norm, const RenderOptions& options) {
  if (month_index < 1 || month_index > 12)
    throw ValidationError("month index out of range: " + std::to_string(month_index));
  const int out_w = options.width > 0 ? options.width : camera.width();
  const int out_h = options.height > 0 ? options.height : camera.height();
  if (out_w <= 0 || out_h <= 0) throw ValidationError("render resolution must be positive");
  const double row_scale = static_cast<double>(camera.height()) / out_h;
  const double col_scale = static_cast<double>(camera.width()) / out_w;
  const int ns = options.n_samples;

  RenderResult result{Image(out_h, out_w, 3), Image(out_h, out_w, 1), Image(out_h, out_w, 1)};

  const double alt_min = norm.bounds().alt_min();
  const double alt_max = norm.bounds().alt_max();

  auto render_row = [&](int r) {
    std::vector<Ray> rays(out_w);
    Eigen::MatrixXd positions(3, out_w * ns);
    std::vector<Eigen::VectorXd> deltas(out_w), ts(out_w);
    for (int c = 0; c < out_w; ++c) {
      rays[c] = ray_for_pixel(camera, r * row_scale, c * col_scale, alt_min, alt_max, frame, norm);
      RaySamples smp = sample_along_ray(rays[c], ns, options.mode,
                                        mix_seed(options.seed, static_cast<std::uint64_t>(r),
                                                 static_cast<std::uint64_t>(c)));
      positions.middleCols(c * ns, ns) = smp.positions;
      deltas[c] = std::move(smp.delta);
      ts[c] = std::move(smp.t);
    }
    FieldInputs inputs;
    inputs.x_enc = input_spec.transform(positions);
    inputs.d_sun = d_sun.replicate(1, out_w * ns);
    inputs.month.assign(out_w * ns, month_index);
    inputs.image.assign(out_w * ns, image_index);
    const FieldActivations acts = field_forward(params, std::move(inputs), gate);
    for (int c = 0; c < out_w; ++c) {
      const SampleSlice slice = slice_outputs(acts.outputs, c * ns, ns);
      RenderedPixel px = compose_color(slice, deltas[c], ts[c], rays[c].t_near, rays[c].t_far,
                                       params.config.beta_min);
      px.altitude_m = rays[c].altitude_at(px.t_mean);
      for (int ch = 0; ch < 3; ++ch) result.color.at(r, c, ch) = px.color[ch];
      result.altitude.at(r, c) = px.altitude_m;
      result.opacity.at(r, c) = px.opacity;
    }
  };

  int n_threads = options.threads > 0 ? options.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, out_h));
  if (n_threads == 1) {
    for (int r = 0; r < out_h; ++r) render_row(r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int tid = 0; tid < n_threads; ++tid) {
      pool.emplace_back([&, tid] {
        for (int r = tid; r < out_h; r += n_threads) render_row(r);
      });
    }
    for (auto& th : pool) th.join();
  }
  return result;
}

}  // namespace planetnerf
