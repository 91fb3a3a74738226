// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdc/core.hpp"
#include "bdc/elicit.hpp"
#include "bdc/mcmc.hpp"
#include "bdc/summarize.hpp"
#include "bdc/synth.hpp"

namespace bdc::io {

// Headerless numeric CSV (commas and/or whitespace). Throws ValidationError
// with the offending line on malformed input.
std::vector<std::vector<double>> read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::vector<double>>& rows);

DataMatrix read_data(const std::string& path);
void write_data(const std::string& path, const DataMatrix& data);
void write_matrix(const std::string& path, const DissimilarityMatrix& d);
void write_coclustering(const std::string& path, const Coclustering& s);

// One integer label per line (any ids); written 1-based.
Partition read_labels(const std::string& path);
void write_labels(const std::string& path, const Partition& rho);

// JSON lines, one retained draw per line, plus <path>.meta.json with the
// options, seed and acceptance counters.
void write_chain(const std::string& path, const SampleChain& chain, const std::string& meta_json = "");
SampleChain read_chain(const std::string& path);
std::string chain_record_json(const ChainRecord& record);

struct RunParams {
  ModelParams model;
  ESCParams prior;
  std::optional<Partition> initial_labels;
};

void write_params(const std::string& path, const ElicitationReport& report);
RunParams read_params(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace bdc::io
