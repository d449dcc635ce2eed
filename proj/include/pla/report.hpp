#pragma once

// Comma-separated outputs: run reports, retrieval metrics and optimizer traces.

#include "pla/bayes_opt.hpp"
#include "pla/eval.hpp"
#include "pla/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace pla {

/// phase,round,candidate,epoch,lambda,margin,k,p,lr,mean_ce,mean_gbh,mean_total
void write_epoch_csv(std::ostream& out, const std::vector<EpochRow>& rows);
std::vector<EpochRow> read_epoch_csv(std::istream& in);

/// round,candidate,lambda,margin,k,p,first_half_mean,second_half_mean,objective
void write_exploration_csv(std::ostream& out, const std::vector<ExplorationRow>& rows);

/// round,candidate,lambda,margin,k,p,ei,best_objective,b_lambda,b_margin,b_k,b_p,epochs
void write_choice_csv(std::ostream& out, const std::vector<ChoiceRow>& rows);

/// Writes report.csv, explorations.csv and choices.csv into dir.
void write_run_report(const std::filesystem::path& dir, const RunReport& report);

/// rank,cmc (1-based rank)
void write_cmc_csv(std::ostream& out, const RetrievalMetrics& m);
/// rank1,map,excluded_queries
void write_metrics_summary_csv(std::ostream& out, const RetrievalMetrics& m);

/// round,lambda,margin,k,p,value,best_so_far,ei
void write_trace_csv(std::ostream& out, const std::vector<TuneStep>& trace);

}  // namespace pla
