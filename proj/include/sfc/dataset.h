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

#ifndef SFC_DATASET_H_
#define SFC_DATASET_H_

#include <array>
#include <string>
#include <vector>

#include "sfc/tensor.h"

namespace sfc {

enum class Split : int { kTrain = 0, kVal = 1, kTest = 2 };

struct DatasetEntry {
  std::string path;      // absolute or manifest-relative image path
  std::string identity;  // subdirectory name
  int index_in_identity = 0;  // 1-based, ordered by filename
  int class_label = -1;  // dense label over train identities, -1 otherwise
  Split split = Split::kTrain;
};

// Identity-disjoint manifest. The content hash covers identity names, file
// names, split assignment and the file bytes, so any change to the corpus
// changes the hash.
struct DatasetManifest {
  std::vector<DatasetEntry> entries;
  std::vector<std::string> train_identities;  // index == class_label
  std::vector<std::string> val_identities;
  std::vector<std::string> test_identities;
  std::string content_hash;
  uint64_t seed = 0;

  std::string ToJson() const;
  static DatasetManifest FromJson(const std::string& json);
  void SaveFile(const std::string& path) const;
  static DatasetManifest LoadFile(const std::string& path);

  std::vector<const DatasetEntry*> EntriesFor(Split split) const;
};

// Scans root_dir (one subdirectory per identity), validates that images
// decode, assigns identity-disjoint splits from the ratio weights and seed.
// Unreadable images are skipped with a warning on stderr. Fewer than two
// identities is a DataError.
DatasetManifest Ingest(const std::string& root_dir,
                       const std::array<double, 3>& split_ratios,
                       uint64_t seed);

// Verification pairs, LFW pairs.txt layout: header "folds\tpairs_per_fold",
// then per fold `pairs_per_fold` matched lines (name idx1 idx2) followed by
// `pairs_per_fold` mismatched lines (name1 idx1 name2 idx2).
struct VerificationPair {
  std::string identity_a;
  int index_a = 0;
  std::string identity_b;
  int index_b = 0;
  bool same = false;
  int fold = 0;
};

struct PairsFile {
  int folds = 0;
  int pairs_per_fold = 0;
  std::vector<VerificationPair> pairs;
};

PairsFile ReadPairsFile(const std::string& path);
void WritePairsFile(const PairsFile& pairs, const std::string& path);

// Samples a pairs file over the manifest's test identities.
PairsFile MakeVerificationPairs(const DatasetManifest& manifest, int folds,
                                int pairs_per_fold, uint64_t seed);

// In-memory split: images resized (bicubic) to `size`, labels aligned.
struct LoadedFaces {
  Tensor images;  // (N, size, size, 3)
  std::vector<int> labels;
  std::vector<const DatasetEntry*> entries;
  int size = 0;
};

LoadedFaces LoadFaces(const DatasetManifest& manifest, Split split, int size);

}  // namespace sfc

#endif  // SFC_DATASET_H_
