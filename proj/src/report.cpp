#include "pla/report.hpp"

#include "pla/error.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pla {
namespace {

std::string real(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf, static_cast<std::size_t>(len)};
}

std::string hp(const HyperParams& w) {
    return real(w.lambda) + ',' + real(w.margin) + ',' + std::to_string(w.k) + ',' + std::to_string(w.p);
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw Error("cannot open " + p.string() + " for writing");
    return out;
}

constexpr const char* kEpochHeader = "phase,round,candidate,epoch,lambda,margin,k,p,lr,mean_ce,mean_gbh,mean_total";

}  // namespace

void write_epoch_csv(std::ostream& out, const std::vector<EpochRow>& rows) {
    out << kEpochHeader << '\n';
    for (const auto& r : rows) {
        out << r.phase << ',' << r.round << ',' << r.candidate << ',' << r.epoch << ',' << hp(r.w) << ','
            << real(r.lr) << ',' << real(r.loss.softmax_term) << ',' << real(r.loss.gbh_term) << ','
            << real(r.loss.total) << '\n';
    }
}

std::vector<EpochRow> read_epoch_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kEpochHeader) throw ParseError(1, "not an epoch report header");
    std::vector<EpochRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream is(line);
        std::string field;
        while (std::getline(is, field, ',')) f.push_back(field);
        if (f.size() != 12) throw ParseError(lineno, "expected 12 columns");
        try {
            EpochRow r;
            r.phase = f[0];
            r.round = std::stoi(f[1]);
            r.candidate = std::stoi(f[2]);
            r.epoch = std::stoi(f[3]);
            r.w = {std::stod(f[4]), std::stod(f[5]), std::stoi(f[6]), std::stoi(f[7])};
            r.lr = std::stod(f[8]);
            r.loss = {std::stod(f[9]), std::stod(f[10]), std::stod(f[11])};
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw ParseError(lineno, "malformed number");
        }
    }
    return rows;
}

void write_exploration_csv(std::ostream& out, const std::vector<ExplorationRow>& rows) {
    out << "round,candidate,lambda,margin,k,p,first_half_mean,second_half_mean,objective\n";
    for (const auto& r : rows) {
        out << r.round << ',' << r.candidate << ',' << hp(r.w) << ',' << real(r.first_half) << ','
            << real(r.second_half) << ',' << real(r.objective) << '\n';
    }
}

void write_choice_csv(std::ostream& out, const std::vector<ChoiceRow>& rows) {
    out << "round,candidate,lambda,margin,k,p,ei,best_objective,b_lambda,b_margin,b_k,b_p,epochs\n";
    for (const auto& r : rows) {
        out << r.round << ',' << r.candidate << ',' << hp(r.w) << ',' << real(r.ei) << ','
            << real(r.best_objective);
        for (int j = 0; j < 4; ++j) out << ',' << real(r.bandwidth[j]);
        out << ',' << r.epochs << '\n';
    }
}

void write_run_report(const std::filesystem::path& dir, const RunReport& report) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "report.csv");
        write_epoch_csv(out, report.epochs);
    }
    {
        auto out = open_out(dir / "explorations.csv");
        write_exploration_csv(out, report.explorations);
    }
    auto out = open_out(dir / "choices.csv");
    write_choice_csv(out, report.choices);
}

void write_cmc_csv(std::ostream& out, const RetrievalMetrics& m) {
    out << "rank,cmc\n";
    for (std::size_t r = 0; r < m.cmc.size(); ++r) out << r + 1 << ',' << real(m.cmc[r]) << '\n';
}

void write_metrics_summary_csv(std::ostream& out, const RetrievalMetrics& m) {
    out << "rank1,map,excluded_queries\n" << real(m.rank1) << ',' << real(m.map) << ',' << m.excluded_queries << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<TuneStep>& trace) {
    out << "round,lambda,margin,k,p,value,best_so_far,ei\n";
    for (const auto& s : trace) {
        out << s.round << ',' << hp(s.w) << ',' << real(s.value) << ',' << real(s.best_so_far) << ','
            << real(s.ei) << '\n';
    }
}

}  // namespace pla
