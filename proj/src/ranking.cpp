#include "phyloalg/ranking.hpp"

#include "phyloalg/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>

namespace phyloalg {

namespace {

bool wants(const std::vector<Criterion>& cs, Criterion c) {
    return std::find(cs.begin(), cs.end(), c) != cs.end();
}

void add_flag(CandidateScore& s, const std::string& f) {
    if (std::find(s.flags.begin(), s.flags.end(), f) == s.flags.end()) s.flags.push_back(f);
}

CandidateScore score_candidate(const MatrixCandidate& c, const std::vector<Criterion>& criteria) {
    CandidateScore s;
    s.id = c.id;
    s.newick = c.newick;
    bool exact = wants(criteria, Criterion::Linf) || wants(criteria, Criterion::L1);
    bool dist = wants(criteria, Criterion::Dist);
    Rational linf = 0, l1 = 0;
    double dmax = 0;
    for (const auto& f : c.flattenings) {
        SplitDetail d;
        d.label = f.label;
        d.degenerate = f.matrix.rows < 3 || f.matrix.cols < 3;
        if (exact) {
            d.norms = minor_norms(f.matrix);
            if (d.norms.linf > linf) linf = d.norms.linf;
            l1 += d.norms.l1;
            s.minor_count += d.norms.minor_count;
        }
        if (dist) {
            SpectralResult r = spectral_summary(f.matrix);
            d.dist_sq = r.dist_sq_rank2;
            d.unique_minimizer = r.unique_minimizer;
            dmax = std::max(dmax, d.dist_sq);
            if (!r.unique_minimizer) add_flag(s, "non_unique_minimizer");
        }
        if (d.degenerate) add_flag(s, "degenerate_flattening");
        s.splits.push_back(std::move(d));
    }
    if (c.flattenings.empty()) add_flag(s, "no_splits");
    if (wants(criteria, Criterion::Linf)) s.linf = linf;
    if (wants(criteria, Criterion::L1)) s.l1 = l1;
    if (dist) s.dist_sq_lb = dmax;
    return s;
}

const std::string& tie_key(const CandidateScore& s) {
    return s.newick.empty() ? s.id : s.newick;
}

Winner pick(const std::vector<CandidateScore>& cs, Criterion c) {
    std::vector<std::size_t> at_min;
    if (c == Criterion::Dist) {
        double best = *cs.front().dist_sq_lb;
        for (const auto& s : cs) best = std::min(best, *s.dist_sq_lb);
        for (std::size_t i = 0; i < cs.size(); ++i)
            if (*cs[i].dist_sq_lb - best <= kDistanceTieBand) at_min.push_back(i);
    } else {
        auto value = [&](const CandidateScore& s) -> const Rational& { return c == Criterion::Linf ? *s.linf : *s.l1; };
        Rational best = value(cs.front());
        for (const auto& s : cs)
            if (value(s) < best) best = value(s);
        for (std::size_t i = 0; i < cs.size(); ++i)
            if (value(cs[i]) == best) at_min.push_back(i);
    }
    std::sort(at_min.begin(), at_min.end(), [&](std::size_t a, std::size_t b) {
        if (tie_key(cs[a]) != tie_key(cs[b])) return tie_key(cs[a]) < tie_key(cs[b]);
        return a < b;
    });
    Winner w;
    w.id = cs[at_min.front()].id;
    for (std::size_t i : at_min) w.tied.push_back(cs[i].id);
    return w;
}

RankingReport assemble(std::vector<CandidateScore> scores, const std::vector<Criterion>& criteria) {
    RankingReport r;
    r.criteria = criteria;
    for (Criterion c : criteria) {
        Winner w = pick(scores, c);
        if (w.tie())
            for (auto& s : scores)
                if (std::find(w.tied.begin(), w.tied.end(), s.id) != w.tied.end())
                    add_flag(s, "tie:" + std::string(criterion_name(c)));
        r.winners.emplace(c, std::move(w));
    }
    bool strict = true;
    std::set<std::string> common;
    bool first = true;
    std::string strict_id;
    for (const auto& [c, w] : r.winners) {
        std::set<std::string> mins(w.tied.begin(), w.tied.end());
        if (w.tie() || (!strict_id.empty() && strict_id != w.id)) strict = false;
        strict_id = w.id;
        if (first) {
            common = mins;
            first = false;
        } else {
            std::set<std::string> next;
            std::set_intersection(common.begin(), common.end(), mins.begin(), mins.end(), std::inserter(next, next.end()));
            common = std::move(next);
        }
    }
    r.agreement = strict ? "consistent" : !common.empty() ? "tied" : "inconsistent";
    r.candidates = std::move(scores);
    return r;
}

void check_inputs(std::size_t count, const std::vector<Criterion>& criteria) {
    if (count == 0) throw ValidationError("no candidate trees");
    if (criteria.empty()) throw ValidationError("no ranking criteria");
}

std::string criteria_list(const std::vector<Criterion>& cs) {
    std::string out;
    for (Criterion c : cs) {
        if (!out.empty()) out += ',';
        out += criterion_name(c);
    }
    return out;
}

} // namespace

std::string_view criterion_name(Criterion c) {
    switch (c) {
    case Criterion::Linf: return "linf";
    case Criterion::L1: return "l1";
    case Criterion::Dist: return "dist";
    }
    return "?";
}

std::vector<Criterion> parse_criteria(std::string_view text) {
    std::set<Criterion> found;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view tok = text.substr(pos, comma - pos);
        if (tok == "linf")
            found.insert(Criterion::Linf);
        else if (tok == "l1")
            found.insert(Criterion::L1);
        else if (tok == "dist")
            found.insert(Criterion::Dist);
        else
            throw ValidationError("unknown criterion '" + std::string(tok) + "' (expected linf, l1, dist)");
        pos = comma + 1;
    }
    return {found.begin(), found.end()};
}

RankingReport rank(const BoundaryDistribution& p, const std::vector<NamedTree>& trees,
                   const std::vector<Criterion>& criteria, bool conditional) {
    check_inputs(trees.size(), criteria);
    std::vector<PhyloTree> aligned;
    for (const auto& t : trees) aligned.push_back(t.tree.with_leaf_order(p.leaves));
    std::vector<std::vector<EdgeSplit>> splits;
    if (conditional) {
        splits = distinguishing_splits(aligned);
    } else {
        for (const auto& t : aligned) splits.push_back(internal_edge_splits(t));
    }
    std::vector<CandidateScore> scores;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        MatrixCandidate c{trees[i].id, write_newick(aligned[i]), {}};
        for (const auto& s : splits[i]) c.flattenings.push_back({format_split(s, p.leaves), flatten(p, s).matrix});
        scores.push_back(score_candidate(c, criteria));
    }
    RankingReport r = assemble(std::move(scores), criteria);
    r.digest = distribution_digest(p);
    r.n_languages = p.n();
    r.leaves = p.leaves;
    r.conditional = conditional;
    return r;
}

RankingReport rank_matrices(const std::vector<MatrixCandidate>& candidates, const std::vector<Criterion>& criteria) {
    check_inputs(candidates.size(), criteria);
    std::vector<CandidateScore> scores;
    std::ostringstream text;
    for (const auto& c : candidates) {
        scores.push_back(score_candidate(c, criteria));
        text << "#candidate\t" << c.id << '\n';
        for (const auto& f : c.flattenings) {
            text << "#matrix\t" << f.label << '\n';
            write_matrix(text, f.matrix);
        }
    }
    RankingReport r = assemble(std::move(scores), criteria);
    r.digest = sha256_hex(text.str());
    return r;
}

std::string report_json(const RankingReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    ordered_json ds;
    ds["digest"] = r.digest;
    ds["n_languages"] = r.n_languages;
    ds["n_variables"] = r.n_variables ? ordered_json(*r.n_variables) : ordered_json(nullptr);
    ds["leaves"] = r.leaves;
    j["dataset"] = ds;
    j["criteria"] = ordered_json::array();
    for (Criterion c : r.criteria) j["criteria"].push_back(criterion_name(c));
    j["conditional"] = r.conditional;
    j["candidates"] = ordered_json::array();
    for (const auto& s : r.candidates) {
        ordered_json c;
        c["id"] = s.id;
        c["newick"] = s.newick;
        c["linf"] = s.linf ? ordered_json(to_pq(*s.linf)) : ordered_json(nullptr);
        c["l1"] = s.l1 ? ordered_json(to_pq(*s.l1)) : ordered_json(nullptr);
        c["dist_sq_lb"] = s.dist_sq_lb ? ordered_json(*s.dist_sq_lb) : ordered_json(nullptr);
        c["minor_count"] = s.minor_count;
        c["splits"] = ordered_json::array();
        for (const auto& d : s.splits) {
            ordered_json sd;
            sd["split"] = d.label;
            if (s.linf || s.l1) {
                sd["linf"] = to_pq(d.norms.linf);
                sd["l1"] = to_pq(d.norms.l1);
            }
            if (s.dist_sq_lb) sd["dist_sq"] = d.dist_sq;
            c["splits"].push_back(sd);
        }
        c["flags"] = s.flags;
        j["candidates"].push_back(c);
    }
    ordered_json w = ordered_json::object();
    ordered_json ties = ordered_json::object();
    for (const auto& [c, win] : r.winners) {
        w[std::string(criterion_name(c))] = win.id;
        ties[std::string(criterion_name(c))] = win.tied;
    }
    j["winners"] = w;
    j["ties"] = ties;
    j["agreement"] = r.agreement;
    return j.dump(2);
}

void write_report(std::ostream& out, const RankingReport& r, std::string_view format) {
    if (format == "json") {
        out << report_json(r) << '\n';
        return;
    }
    auto pq = [](const std::optional<Rational>& v) { return v ? to_pq(*v) : std::string("-"); };
    auto dec = [](const std::optional<Rational>& v) { return v ? to_sci5(*v) : std::string("-"); };
    auto dist = [](const std::optional<double>& v) { return v ? to_sci5(*v) : std::string("-"); };
    auto flags = [](const CandidateScore& s) {
        std::string f;
        for (const auto& x : s.flags) f += (f.empty() ? "" : ",") + x;
        return f.empty() ? std::string("-") : f;
    };
    if (format == "tsv") {
        out << "id\tnewick\tlinf\tl1\tdist_sq_lb\tflags\n";
        for (const auto& s : r.candidates)
            out << s.id << '\t' << (s.newick.empty() ? "-" : s.newick) << '\t' << pq(s.linf) << '\t' << pq(s.l1)
                << '\t' << dist(s.dist_sq_lb) << '\t' << flags(s) << '\n';
        for (const auto& [c, w] : r.winners) {
            out << "#winner\t" << criterion_name(c) << '\t' << w.id;
            for (const auto& t : w.tied) out << '\t' << t;
            out << '\n';
        }
        out << "#agreement\t" << r.agreement << '\n';
        return;
    }
    if (format != "table") throw ValidationError("unknown format '" + std::string(format) + "'");
    out << fmt::format("dataset {}  languages {}  variables {}\n", r.digest.substr(0, 16),
                       r.leaves.empty() ? std::string("-") : std::to_string(r.n_languages),
                       r.n_variables ? std::to_string(*r.n_variables) : std::string("-"));
    out << fmt::format("criteria {}  splits {}\n", criteria_list(r.criteria), r.conditional ? "distinguishing" : "all");
    out << fmt::format("{:<8} {:>24} {:>11} {:>24} {:>11} {:>11}  {}\n", "tree", "linf", "", "l1", "", "dist_sq_lb",
                       "flags");
    for (const auto& s : r.candidates)
        out << fmt::format("{:<8} {:>24} {:>11} {:>24} {:>11} {:>11}  {}\n", s.id, pq(s.linf), dec(s.linf), pq(s.l1),
                           dec(s.l1), dist(s.dist_sq_lb), flags(s));
    for (const auto& [c, w] : r.winners) {
        std::string tied;
        if (w.tie())
            for (const auto& t : w.tied) tied += (tied.empty() ? " (tied: " : ", ") + t;
        out << fmt::format("winner {:<5} {}{}\n", criterion_name(c), w.id, tied.empty() ? "" : tied + ")");
    }
    out << "agreement " << r.agreement << '\n';
}

} // namespace phyloalg
