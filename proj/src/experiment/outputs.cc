// Copyright 2026 The LVAE Authors
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

#include "lvae/experiment/outputs.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "lvae/privacy/privacy_math.h"

namespace lvae::experiment {
namespace {

constexpr int kSvgSize = 480;
constexpr int kSvgMargin = 48;

std::vector<absl::string_view> Lines(std::string_view text) {
  std::vector<absl::string_view> lines =
      absl::StrSplit(absl::string_view(text.data(), text.size()), '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool ParseDouble(absl::string_view field, double& out) {
  const std::string s(field);
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

std::string EscapeXml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

absl::Status WriteFile(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

std::string SamplesCsv(const Tensor& x) {
  const int64_t n = x.rank() == 0 ? 0 : x.dim(0);
  const int64_t d = n == 0 ? NumElements(Shape(x.shape().begin() + 1, x.shape().end()))
                           : x.size() / n;
  std::string out = "sample_id";
  for (int64_t j = 0; j < d; ++j) absl::StrAppend(&out, ",v", j);
  out += '\n';
  for (int64_t i = 0; i < n; ++i) {
    absl::StrAppend(&out, i);
    for (int64_t j = 0; j < d; ++j) {
      absl::StrAppend(&out, ",", absl::StrFormat("%.9g", x[i * d + j]));
    }
    out += '\n';
  }
  return out;
}

absl::StatusOr<Tensor> ParseSamplesCsv(std::string_view text) {
  const std::vector<absl::string_view> lines = Lines(text);
  if (lines.empty() || !absl::StartsWith(lines[0], "sample_id")) {
    return absl::InvalidArgumentError("samples CSV must start with a sample_id header");
  }
  const int64_t d = static_cast<int64_t>(std::count(lines[0].begin(), lines[0].end(), ','));
  if (d < 1) return absl::InvalidArgumentError("samples CSV has no value columns");
  const int64_t n = static_cast<int64_t>(lines.size()) - 1;
  std::vector<double> values;
  values.reserve(n * d);
  for (int64_t i = 0; i < n; ++i) {
    const std::vector<absl::string_view> fields = absl::StrSplit(lines[i + 1], ',');
    if (static_cast<int64_t>(fields.size()) != d + 1) {
      return absl::InvalidArgumentError(absl::StrCat("samples CSV row ", i, " has ",
                                                     fields.size(), " fields, expected ", d + 1));
    }
    for (int64_t j = 1; j <= d; ++j) {
      double v = 0;
      if (!ParseDouble(fields[j], v)) {
        return absl::InvalidArgumentError(absl::StrCat("samples CSV row ", i, ": bad number"));
      }
      values.push_back(v);
    }
  }
  return Tensor({n, d}, std::move(values));
}

std::string ScoresCsv(std::span<const mia::AttackRecord> records) {
  std::string out = "record_id,member,score\n";
  for (const mia::AttackRecord& r : records) {
    absl::StrAppend(&out, r.id, ",", r.member ? 1 : 0, ",", absl::StrFormat("%.17g", r.score),
                    "\n");
  }
  return out;
}

absl::StatusOr<std::vector<mia::AttackRecord>> ParseScoresCsv(std::string_view text) {
  const std::vector<absl::string_view> lines = Lines(text);
  if (lines.empty() || lines[0] != "record_id,member,score") {
    return absl::InvalidArgumentError("scores CSV header must be record_id,member,score");
  }
  std::vector<mia::AttackRecord> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::vector<absl::string_view> f = absl::StrSplit(lines[i], ',');
    mia::AttackRecord r;
    int member = -1;
    if (f.size() != 3 || !absl::SimpleAtoi(f[0], &r.id) || !absl::SimpleAtoi(f[1], &member) ||
        (member != 0 && member != 1) || !ParseDouble(f[2], r.score)) {
      return absl::InvalidArgumentError(absl::StrCat("scores CSV line ", i + 1, " is malformed"));
    }
    r.member = member == 1;
    out.push_back(r);
  }
  return out;
}

std::string CurveCsv(const mia::EmpiricalTradeoff& tradeoff, int points) {
  std::string out = "alpha,beta,beta_envelope\n";
  for (double a : privacy::UniformGrid(points)) {
    absl::StrAppend(&out, absl::StrFormat("%.17g,%.17g,%.17g\n", a, tradeoff.BetaAt(a),
                                          tradeoff.EnvelopeAt(a)));
  }
  return out;
}

absl::StatusOr<std::string> PgmGrid(const Tensor& images) {
  if (images.rank() != 4 || images.dim(3) != 1) {
    return absl::InvalidArgumentError("PGM grids need single-channel images [n, h, w, 1]");
  }
  const int64_t n = images.dim(0), h = images.dim(1), w = images.dim(2);
  const int64_t cols = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(std::sqrt(n))));
  const int64_t rows = std::max<int64_t>(1, (n + cols - 1) / cols);
  const int64_t width = cols * w, height = rows * h;
  std::string out = absl::StrCat("P5\n", width, " ", height, "\n255\n");
  const size_t header = out.size();
  out.resize(header + width * height, '\0');
  for (int64_t k = 0; k < n; ++k) {
    const int64_t r0 = (k / cols) * h, c0 = (k % cols) * w;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const double v = std::clamp(images[(k * h + y) * w + x], 0.0, 1.0);
        out[header + (r0 + y) * width + c0 + x] = static_cast<char>(std::lround(v * 255));
      }
    }
  }
  return out;
}

std::string TradeoffSvg(const std::vector<SvgSeries>& series) {
  const int plot = kSvgSize - 2 * kSvgMargin;
  auto px = [&](double a) { return kSvgMargin + a * plot; };
  auto py = [&](double b) { return kSvgMargin + (1.0 - b) * plot; };
  std::string out = absl::StrFormat(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "viewBox=\"0 0 %d %d\">\n"
      "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"white\" stroke=\"black\"/>\n"
      "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">alpha (false "
      "alarm)</text>\n"
      "<text x=\"14\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 14 %d)\">beta (missed detection)</text>\n",
      kSvgSize, kSvgSize, kSvgSize, kSvgSize, kSvgMargin, kSvgMargin, plot, plot, kSvgSize / 2,
      kSvgSize - 16, kSvgSize / 2, kSvgSize / 2);
  for (size_t s = 0; s < series.size(); ++s) {
    const SvgSeries& ser = series[s];
    std::string pts;
    for (size_t i = 0; i < ser.alpha.size() && i < ser.beta.size(); ++i) {
      absl::StrAppend(&pts, i == 0 ? "" : " ",
                      absl::StrFormat("%.3f,%.3f", px(ser.alpha[i]), py(ser.beta[i])));
    }
    absl::StrAppend(&out, "<polyline fill=\"none\" stroke=\"", EscapeXml(ser.color),
                    "\" stroke-width=\"1.5\" points=\"", pts, "\"><title>", EscapeXml(ser.name),
                    "</title></polyline>\n");
    const int ly = kSvgMargin + 16 + 16 * static_cast<int>(s);
    absl::StrAppend(
        &out, absl::StrFormat("<text x=\"%d\" y=\"%d\" font-size=\"11\" fill=\"%s\">%s</text>\n",
                              kSvgSize - kSvgMargin - 150, ly, EscapeXml(ser.color),
                              EscapeXml(ser.name)));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace lvae::experiment
