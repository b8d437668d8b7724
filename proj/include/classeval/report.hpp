#ifndef CLASSEVAL_REPORT_HPP
#define CLASSEVAL_REPORT_HPP

// Report files written into one output directory:
//
//   config.txt            resolved configuration
//   items.csv             one row per item
//   summary.json          config, aggregates, subsets, chunk summaries
//   boxplot.json          five-number summary of the chunk means per metric
//   confusion.csv         NER, row-normalized gold x predicted
//   confusion_counts.csv  NER, raw counts
//   ner_tags.csv          NER, per-tag P/R/F1
//   traces.jsonl          ToG traces
//   manual_review.csv     QA items needing a human judgement
//
// Contents depend only on the report, so identical runs give identical bytes.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "classeval/experiment.hpp"

namespace classeval {

/// Throws IoError.
void write_report(const MetricReport& report, const std::filesystem::path& out_dir);

nlohmann::json summary_json(const MetricReport& report);

/// Shortest round-trip text of a double.
std::string format_double(double v);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& field);

/// Markdown overview of a written report directory; `reference` is the
/// published-constants file, shown for orientation.
std::string render_markdown(const nlohmann::json& summary, const nlohmann::json& reference);

}  // namespace classeval

#endif  // CLASSEVAL_REPORT_HPP
