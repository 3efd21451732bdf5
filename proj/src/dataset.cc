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

#include "sfc/dataset.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfc/common.h"
#include "sfc/hash.h"
#include "sfc/image_io.h"
#include "sfc/kernels.h"
#include "sfc/rng.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sfc {

namespace {

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split SplitFromName(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split name: " + s);
}

// Largest-remainder allocation of n items to the three ratio weights.
std::array<int, 3> AllocateSplits(int n, const std::array<double, 3>& ratios) {
  double total = ratios[0] + ratios[1] + ratios[2];
  Check(total > 0.0, "split ratios must not all be zero");
  std::array<int, 3> counts{};
  std::array<double, 3> frac{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = n * ratios[i] / total;
    counts[i] = static_cast<int>(exact);
    frac[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned < n) {
    int pick = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[pick]) pick = i;
    }
    ++counts[pick];
    frac[pick] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

std::vector<const DatasetEntry*> DatasetManifest::EntriesFor(Split split) const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::string DatasetManifest::ToJson() const {
  json j;
  j["seed"] = seed;
  j["content_hash"] = content_hash;
  j["train_identities"] = train_identities;
  j["val_identities"] = val_identities;
  j["test_identities"] = test_identities;
  j["entries"] = json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"path", e.path},
                            {"identity", e.identity},
                            {"index", e.index_in_identity},
                            {"label", e.class_label},
                            {"split", SplitName(e.split)}});
  }
  return j.dump(2);
}

DatasetManifest DatasetManifest::FromJson(const std::string& text) {
  json j = json::parse(text);
  DatasetManifest m;
  m.seed = j.at("seed").get<uint64_t>();
  m.content_hash = j.at("content_hash").get<std::string>();
  m.train_identities = j.at("train_identities").get<std::vector<std::string>>();
  m.val_identities = j.at("val_identities").get<std::vector<std::string>>();
  m.test_identities = j.at("test_identities").get<std::vector<std::string>>();
  for (const auto& e : j.at("entries")) {
    DatasetEntry d;
    d.path = e.at("path").get<std::string>();
    d.identity = e.at("identity").get<std::string>();
    d.index_in_identity = e.at("index").get<int>();
    d.class_label = e.at("label").get<int>();
    d.split = SplitFromName(e.at("split").get<std::string>());
    m.entries.push_back(std::move(d));
  }
  return m;
}

void DatasetManifest::SaveFile(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write manifest: " + path);
  f << ToJson();
}

DatasetManifest DatasetManifest::LoadFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read manifest: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return FromJson(ss.str());
}

DatasetManifest Ingest(const std::string& root_dir,
                       const std::array<double, 3>& split_ratios,
                       uint64_t seed) {
  if (!fs::is_directory(root_dir)) {
    throw DataError("dataset root is not a directory: " + root_dir);
  }
  // Identity subdirectories, sorted for determinism.
  std::vector<std::string> identities;
  for (const auto& d : fs::directory_iterator(root_dir)) {
    if (d.is_directory()) identities.push_back(d.path().filename().string());
  }
  std::sort(identities.begin(), identities.end());
  if (identities.size() < 2) {
    throw DataError("ingest needs at least two identities, found " +
                    std::to_string(identities.size()));
  }

  // Validate images per identity.
  std::map<std::string, std::vector<std::string>> files;
  for (const auto& id : identities) {
    std::vector<std::string> names;
    for (const auto& f : fs::directory_iterator(fs::path(root_dir) / id)) {
      if (!f.is_regular_file()) continue;
      names.push_back(f.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    std::vector<std::string> good;
    for (const auto& name : names) {
      const std::string full = (fs::path(root_dir) / id / name).string();
      try {
        Tensor img = ReadImage(full);
        if (img.dim(0) < 8 || img.dim(1) < 8) {
          throw DataError("image too small");
        }
        good.push_back(name);
      } catch (const Error& e) {
        std::cerr << "warning: skipping unreadable image " << full << " ("
                  << e.what() << ")\n";
      }
    }
    files[id] = std::move(good);
  }

  // Identity-disjoint split assignment.
  std::vector<std::string> shuffled = identities;
  Rng rng(seed);
  rng.Shuffle(shuffled);
  const auto counts = AllocateSplits(static_cast<int>(shuffled.size()), split_ratios);

  DatasetManifest m;
  m.seed = seed;
  std::map<std::string, Split> split_of;
  int pos = 0;
  for (int i = 0; i < counts[0]; ++i) split_of[shuffled[static_cast<size_t>(pos++)]] = Split::kTrain;
  for (int i = 0; i < counts[1]; ++i) split_of[shuffled[static_cast<size_t>(pos++)]] = Split::kVal;
  for (int i = 0; i < counts[2]; ++i) split_of[shuffled[static_cast<size_t>(pos++)]] = Split::kTest;

  for (const auto& id : identities) {
    switch (split_of[id]) {
      case Split::kTrain: m.train_identities.push_back(id); break;
      case Split::kVal: m.val_identities.push_back(id); break;
      case Split::kTest: m.test_identities.push_back(id); break;
    }
  }

  std::map<std::string, int> train_label;
  for (size_t i = 0; i < m.train_identities.size(); ++i) {
    train_label[m.train_identities[i]] = static_cast<int>(i);
  }

  Sha256 hasher;
  for (const auto& id : identities) {
    const Split sp = split_of[id];
    int idx = 0;
    for (const auto& name : files[id]) {
      DatasetEntry e;
      e.path = (fs::path(root_dir) / id / name).string();
      e.identity = id;
      e.index_in_identity = ++idx;
      e.class_label = sp == Split::kTrain ? train_label[id] : -1;
      e.split = sp;
      hasher.Update(id);
      hasher.Update(name);
      hasher.Update(std::string(SplitName(sp)));
      hasher.Update(HashFile(e.path));
      m.entries.push_back(std::move(e));
    }
  }
  const auto digest = hasher.Finish();
  m.content_hash = ToHex(digest.data(), digest.size());
  return m;
}

PairsFile ReadPairsFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read pairs file: " + path);
  PairsFile out;
  std::string line;
  if (!std::getline(f, line)) throw DataError("empty pairs file");
  {
    std::istringstream ss(line);
    ss >> out.folds >> out.pairs_per_fold;
    if (out.folds <= 0 || out.pairs_per_fold <= 0) {
      throw DataError("bad pairs header");
    }
  }
  for (int fold = 0; fold < out.folds; ++fold) {
    for (int kind = 0; kind < 2; ++kind) {
      for (int i = 0; i < out.pairs_per_fold; ++i) {
        if (!std::getline(f, line)) throw DataError("truncated pairs file");
        std::istringstream ss(line);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        VerificationPair p;
        p.fold = fold;
        if (kind == 0) {
          if (tok.size() != 3) throw DataError("bad matched pair line");
          p.identity_a = tok[0];
          p.index_a = std::stoi(tok[1]);
          p.identity_b = tok[0];
          p.index_b = std::stoi(tok[2]);
          p.same = true;
        } else {
          if (tok.size() != 4) throw DataError("bad mismatched pair line");
          p.identity_a = tok[0];
          p.index_a = std::stoi(tok[1]);
          p.identity_b = tok[2];
          p.index_b = std::stoi(tok[3]);
          p.same = false;
        }
        out.pairs.push_back(std::move(p));
      }
    }
  }
  return out;
}

void WritePairsFile(const PairsFile& pairs, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write pairs file: " + path);
  f << pairs.folds << "\t" << pairs.pairs_per_fold << "\n";
  // Grouped per fold: matched block then mismatched block.
  for (int fold = 0; fold < pairs.folds; ++fold) {
    for (int kind = 0; kind < 2; ++kind) {
      for (const auto& p : pairs.pairs) {
        if (p.fold != fold || p.same != (kind == 0)) continue;
        if (p.same) {
          f << p.identity_a << "\t" << p.index_a << "\t" << p.index_b << "\n";
        } else {
          f << p.identity_a << "\t" << p.index_a << "\t" << p.identity_b << "\t"
            << p.index_b << "\n";
        }
      }
    }
  }
}

PairsFile MakeVerificationPairs(const DatasetManifest& manifest, int folds,
                                int pairs_per_fold, uint64_t seed) {
  const auto& ids = manifest.test_identities;
  if (ids.size() < 2) {
    throw DataError("verification pairs need at least two test identities");
  }
  std::map<std::string, int> count_of;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::kTest) {
      count_of[e.identity] = std::max(count_of[e.identity], e.index_in_identity);
    }
  }
  Rng rng(seed ^ 0x70617273ull);
  PairsFile out;
  out.folds = folds;
  out.pairs_per_fold = pairs_per_fold;
  for (int fold = 0; fold < folds; ++fold) {
    for (int i = 0; i < pairs_per_fold; ++i) {
      // Matched pair.
      const auto& id = ids[rng.NextIndex(ids.size())];
      const int n = count_of[id];
      Check(n >= 2, "identity needs two images for a matched pair");
      const int a = static_cast<int>(rng.NextIndex(static_cast<uint64_t>(n))) + 1;
      int b = static_cast<int>(rng.NextIndex(static_cast<uint64_t>(n - 1))) + 1;
      if (b >= a) ++b;
      VerificationPair p;
      p.fold = fold;
      p.identity_a = id;
      p.index_a = a;
      p.identity_b = id;
      p.index_b = b;
      p.same = true;
      out.pairs.push_back(p);
    }
    for (int i = 0; i < pairs_per_fold; ++i) {
      // Mismatched pair.
      const size_t ia = rng.NextIndex(ids.size());
      size_t ib = rng.NextIndex(ids.size() - 1);
      if (ib >= ia) ++ib;
      VerificationPair p;
      p.fold = fold;
      p.identity_a = ids[ia];
      p.index_a = static_cast<int>(rng.NextIndex(
                      static_cast<uint64_t>(count_of[ids[ia]]))) + 1;
      p.identity_b = ids[ib];
      p.index_b = static_cast<int>(rng.NextIndex(
                      static_cast<uint64_t>(count_of[ids[ib]]))) + 1;
      p.same = false;
      out.pairs.push_back(p);
    }
  }
  return out;
}

LoadedFaces LoadFaces(const DatasetManifest& manifest, Split split, int size) {
  const auto entries = manifest.EntriesFor(split);
  Check(!entries.empty(), "no entries in requested split");
  LoadedFaces out;
  out.size = size;
  out.images = Tensor({static_cast<int>(entries.size()), size, size, 3});
  out.entries = entries;
  for (size_t i = 0; i < entries.size(); ++i) {
    Tensor img = ReadImage(entries[i]->path);
    if (img.dim(0) != size || img.dim(1) != size) {
      Tensor resized({size, size, 3});
      kernels::ResizeBicubic(img.data(), img.dim(0), img.dim(1), 3,
                             resized.data(), size, size);
      // Bicubic overshoot is clipped back into the pixel range.
      for (size_t j = 0; j < resized.size(); ++j) {
        resized[j] = std::clamp(resized[j], 0.0f, 1.0f);
      }
      img = std::move(resized);
    }
    out.images.SetSlice(static_cast<int>(i), img);
    out.labels.push_back(entries[i]->class_label);
  }
  return out;
}

}  // namespace sfc
