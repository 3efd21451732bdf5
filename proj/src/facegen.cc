// Copyright (c) the SFC Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sfc/facegen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sfc/image_io.h"
#include "sfc/rng.h"

namespace fs = std::filesystem;

namespace sfc {

namespace {

struct Rgb {
  float r, g, b;
};

struct IdentityParams {
  Rgb skin, hair, iris, lip, brow;
  float face_rx, face_ry, face_cy;
  float eye_y, eye_dx, eye_r;
  float brow_dy, brow_w, brow_h, brow_slant;
  float nose_len, nose_w;
  float mouth_y, mouth_w, mouth_h, mouth_curve;
  float hairline, hair_rx;
};

struct ImageJitter {
  float dx, dy, scale;
  float brightness;
  float light_dir, light_amp;
  float mouth_curve_jit, eye_open;
  Rgb background;
  uint64_t noise_seed;
};

IdentityParams SampleIdentity(uint64_t seed) {
  Rng rng(seed);
  IdentityParams p;
  const float tone = static_cast<float>(rng.NextUniform(0.35, 0.85));
  p.skin = {tone, tone * static_cast<float>(rng.NextUniform(0.70, 0.85)),
            tone * static_cast<float>(rng.NextUniform(0.55, 0.75))};
  p.hair = {static_cast<float>(rng.NextUniform(0.05, 0.8)),
            static_cast<float>(rng.NextUniform(0.05, 0.6)),
            static_cast<float>(rng.NextUniform(0.02, 0.5))};
  p.iris = {static_cast<float>(rng.NextUniform(0.05, 0.5)),
            static_cast<float>(rng.NextUniform(0.1, 0.6)),
            static_cast<float>(rng.NextUniform(0.2, 0.8))};
  p.lip = {static_cast<float>(rng.NextUniform(0.5, 0.8)),
           static_cast<float>(rng.NextUniform(0.2, 0.4)),
           static_cast<float>(rng.NextUniform(0.25, 0.45))};
  p.brow = {p.hair.r * 0.7f, p.hair.g * 0.7f, p.hair.b * 0.7f};
  p.face_rx = static_cast<float>(rng.NextUniform(0.26, 0.36));
  p.face_ry = static_cast<float>(rng.NextUniform(0.36, 0.46));
  p.face_cy = static_cast<float>(rng.NextUniform(0.5, 0.56));
  p.eye_y = static_cast<float>(rng.NextUniform(0.40, 0.47));
  p.eye_dx = static_cast<float>(rng.NextUniform(0.11, 0.17));
  p.eye_r = static_cast<float>(rng.NextUniform(0.030, 0.048));
  p.brow_dy = static_cast<float>(rng.NextUniform(0.055, 0.085));
  p.brow_w = static_cast<float>(rng.NextUniform(0.06, 0.10));
  p.brow_h = static_cast<float>(rng.NextUniform(0.008, 0.020));
  p.brow_slant = static_cast<float>(rng.NextUniform(-0.25, 0.25));
  p.nose_len = static_cast<float>(rng.NextUniform(0.10, 0.16));
  p.nose_w = static_cast<float>(rng.NextUniform(0.015, 0.035));
  p.mouth_y = static_cast<float>(rng.NextUniform(0.70, 0.76));
  p.mouth_w = static_cast<float>(rng.NextUniform(0.08, 0.14));
  p.mouth_h = static_cast<float>(rng.NextUniform(0.012, 0.026));
  p.mouth_curve = static_cast<float>(rng.NextUniform(-0.03, 0.05));
  p.hairline = static_cast<float>(rng.NextUniform(0.18, 0.30));
  p.hair_rx = p.face_rx * static_cast<float>(rng.NextUniform(1.05, 1.25));
  return p;
}

ImageJitter SampleJitter(uint64_t seed) {
  Rng rng(seed);
  ImageJitter j;
  j.dx = static_cast<float>(rng.NextUniform(-0.03, 0.03));
  j.dy = static_cast<float>(rng.NextUniform(-0.03, 0.03));
  j.scale = static_cast<float>(rng.NextUniform(0.94, 1.06));
  j.brightness = static_cast<float>(rng.NextUniform(-0.07, 0.07));
  j.light_dir = static_cast<float>(rng.NextUniform(0.0, 2.0 * M_PI));
  j.light_amp = static_cast<float>(rng.NextUniform(0.0, 0.10));
  j.mouth_curve_jit = static_cast<float>(rng.NextUniform(-0.02, 0.02));
  j.eye_open = static_cast<float>(rng.NextUniform(0.55, 1.0));
  j.background = {static_cast<float>(rng.NextUniform(0.1, 0.9)),
                  static_cast<float>(rng.NextUniform(0.1, 0.9)),
                  static_cast<float>(rng.NextUniform(0.1, 0.9))};
  j.noise_seed = rng.NextU64();
  return j;
}

inline float Smooth(float sdf, float soft) {
  // 1 inside (sdf < 0), 0 outside, smooth ramp of width `soft`.
  const float t = std::clamp(0.5f - sdf / soft, 0.0f, 1.0f);
  return t * t * (3.0f - 2.0f * t);
}

inline void Blend(Rgb* dst, const Rgb& src, float alpha) {
  dst->r += (src.r - dst->r) * alpha;
  dst->g += (src.g - dst->g) * alpha;
  dst->b += (src.b - dst->b) * alpha;
}

inline float Ellipse(float x, float y, float cx, float cy, float rx, float ry) {
  const float nx = (x - cx) / rx;
  const float ny = (y - cy) / ry;
  return std::sqrt(nx * nx + ny * ny) - 1.0f;
}

}  // namespace

Tensor RenderToyFace(uint64_t identity_seed, uint64_t image_seed, int size) {
  const IdentityParams id = SampleIdentity(identity_seed);
  const ImageJitter jit = SampleJitter(image_seed);
  Rng noise(jit.noise_seed);

  Tensor img({size, size, 3});
  const float soft = 1.6f / static_cast<float>(size);
  const float mouth_curve = id.mouth_curve + jit.mouth_curve_jit;
  const float cos_l = std::cos(jit.light_dir), sin_l = std::sin(jit.light_dir);

  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      // Normalized face-frame coordinates with per-image pose jitter.
      const float u0 = (static_cast<float>(px) + 0.5f) / size;
      const float v0 = (static_cast<float>(py) + 0.5f) / size;
      const float u = (u0 - 0.5f - jit.dx) / jit.scale + 0.5f;
      const float v = (v0 - 0.5f - jit.dy) / jit.scale + 0.5f;

      Rgb c = jit.background;
      // Hair mass behind the face.
      const float hair_sdf =
          Ellipse(u, v, 0.5f, id.face_cy - 0.06f, id.hair_rx, id.face_ry * 1.12f);
      Blend(&c, id.hair, Smooth(hair_sdf, soft));
      // Face oval.
      const float face_sdf = Ellipse(u, v, 0.5f, id.face_cy, id.face_rx, id.face_ry);
      Blend(&c, id.skin, Smooth(face_sdf, soft));
      // Hair cap over the forehead.
      if (face_sdf < 0.0f && v < id.face_cy - id.face_ry + id.hairline) {
        Blend(&c, id.hair, Smooth(face_sdf, soft));
      }
      // Eyes (white + iris), lid controlled by eye_open.
      for (int side = -1; side <= 1; side += 2) {
        const float ex = 0.5f + side * id.eye_dx;
        const float open_ry = id.eye_r * 0.72f * jit.eye_open;
        const float white_sdf = Ellipse(u, v, ex, id.eye_y, id.eye_r, open_ry);
        Blend(&c, {0.93f, 0.93f, 0.93f}, Smooth(white_sdf, soft));
        const float iris_sdf =
            Ellipse(u, v, ex, id.eye_y, id.eye_r * 0.45f, std::min(open_ry, id.eye_r * 0.45f));
        Blend(&c, id.iris, Smooth(iris_sdf, soft));
        // Brow: slanted bar above the eye.
        const float bx = u - ex;
        const float by = v - (id.eye_y - id.brow_dy) + id.brow_slant * side * bx;
        if (std::fabs(bx) < id.brow_w && std::fabs(by) < id.brow_h) {
          Blend(&c, id.brow, 0.9f);
        }
      }
      // Nose: vertical wedge with a darker shade.
      {
        const float ny0 = id.eye_y + 0.03f;
        const float ny1 = ny0 + id.nose_len;
        if (v >= ny0 && v <= ny1) {
          const float t = (v - ny0) / (ny1 - ny0);
          const float half_w = id.nose_w * (0.35f + 0.65f * t);
          const float d = std::fabs(u - 0.5f) - half_w;
          const Rgb shade{id.skin.r * 0.82f, id.skin.g * 0.80f, id.skin.b * 0.80f};
          Blend(&c, shade, Smooth(d, soft) * 0.8f);
        }
      }
      // Mouth: curved lens shape.
      {
        const float mx = (u - 0.5f) / id.mouth_w;
        if (std::fabs(mx) < 1.0f) {
          const float curve = mouth_curve * (mx * mx - 1.0f);
          const float d = std::fabs(v - id.mouth_y - curve) -
                          id.mouth_h * (1.0f - 0.55f * mx * mx);
          Blend(&c, id.lip, Smooth(d, soft));
        }
      }
      // Lighting gradient + brightness jitter + sensor noise.
      const float lx = u0 - 0.5f, ly = v0 - 0.5f;
      const float light = 1.0f + jit.brightness + jit.light_amp * (lx * cos_l + ly * sin_l);
      const float n = static_cast<float>(noise.NextGaussian()) * 0.012f;
      img.At(py, px, 0) = std::clamp(c.r * light + n, 0.0f, 1.0f);
      img.At(py, px, 1) = std::clamp(c.g * light + n, 0.0f, 1.0f);
      img.At(py, px, 2) = std::clamp(c.b * light + n, 0.0f, 1.0f);
    }
  }
  return img;
}

void GenerateToyFaces(const std::string& root_dir, int num_identities,
                      int images_per_identity, int size, uint64_t seed) {
  Rng rng(seed);
  fs::create_directories(root_dir);
  for (int id = 0; id < num_identities; ++id) {
    char name[32];
    std::snprintf(name, sizeof(name), "id_%03d", id);
    const fs::path dir = fs::path(root_dir) / name;
    fs::create_directories(dir);
    const uint64_t id_seed = rng.NextU64();
    Rng img_rng = rng.Fork(name);
    for (int i = 1; i <= images_per_identity; ++i) {
      char file[64];
      std::snprintf(file, sizeof(file), "%s_%04d.png", name, i);
      const Tensor img = RenderToyFace(id_seed, img_rng.NextU64(), size);
      WritePng(img, (dir / file).string());
    }
  }
}

}  // namespace sfc
