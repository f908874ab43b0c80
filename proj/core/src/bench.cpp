#include "softlex/bench.hpp"

#include "json.hpp"

namespace softlex {

void write_bench_json(std::ostream& out, const BenchReport& report) {
  nlohmann::json j;
  j["overall_sentences_per_sec"] = report.overall_sps;
  j["batch_size"] = report.batch_size;
  j["threads"] = report.threads;
  j["variant"] = report.variant;
  j["warmup_sentences"] = report.warmup_sentences;
  j["measured_sentences"] = report.measured_sentences;
  j["passes"] = report.passes;
  j["clock"] = report.clock;
  j["precision"] = report.precision;
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : report.buckets) {
    nlohmann::json jb;
    jb["lo"] = b.lo;
    jb["hi"] = b.hi == 0 ? nlohmann::json() : nlohmann::json(b.hi);
    jb["sentences"] = b.sentences;
    jb["sentences_per_sec"] = b.sentences_per_sec;
    buckets.push_back(jb);
  }
  j["buckets"] = buckets;
  out << j.dump(2) << '\n';
}

void write_bench_tsv(std::ostream& out, const BenchReport& report) {
  out << "bucket_midpoint\tsentences_per_sec\n";
  for (const auto& b : report.buckets) {
    const double mid = b.hi == 0 ? b.lo + kBenchBucketWidth / 2.0
                                 : (b.lo + b.hi) / 2.0;
    out << mid << '\t' << b.sentences_per_sec << '\n';
  }
}

}  // namespace softlex
