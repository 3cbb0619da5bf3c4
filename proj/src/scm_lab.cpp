#include "poc/scm_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "poc/rng.hpp"

namespace poc {

std::string to_string(GraphFamily family) {
    return family == GraphFamily::nondesc ? "nondesc" : "mediator";
}

GraphFamily graph_family_from_string(const std::string& text) {
    if (text == "nondesc") return GraphFamily::nondesc;
    if (text == "mediator") return GraphFamily::mediator;
    throw ArgumentError("unknown graph family '" + text + "' (expected nondesc or mediator)");
}

std::string to_string(Availability availability) {
    switch (availability) {
    case Availability::joint: return "joint";
    case Availability::covariate_specific: return "covariate_specific";
    case Availability::marginal_only: return "marginal_only";
    }
    return "?";
}

Availability availability_from_string(const std::string& text) {
    if (text == "joint") return Availability::joint;
    if (text == "covariate_specific") return Availability::covariate_specific;
    if (text == "marginal_only") return Availability::marginal_only;
    throw ArgumentError("unknown availability '" + text + "'");
}

namespace {

std::size_t ipow(int base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
    return out;
}

void check_rows(const std::vector<std::vector<double>>& rows, std::size_t count, std::size_t width,
                const char* what) {
    if (rows.size() != count)
        throw ArgumentError(std::string(what) + ": expected " + std::to_string(count) + " rows");
    for (const auto& row : rows) {
        if (row.size() != width)
            throw ArgumentError(std::string(what) + ": expected rows of width " + std::to_string(width));
        double s = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw ArgumentError(std::string(what) + ": negative entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw ArgumentError(std::string(what) + ": row does not sum to 1");
    }
}

template <class Engine>
std::vector<double> flat_dirichlet(Engine& rng, std::size_t k) {
    std::vector<double> row(k);
    double total = 0.0;
    for (auto& v : row) {
        v = -std::log(uniform01(rng));
        total += v;
    }
    for (auto& v : row) v /= total;
    return row;
}

/// A unit type: potential outcomes (and mediators) under every arm.
struct Unit {
    std::vector<int> y;  // Y_{x_t}
    std::vector<int> w;  // W_{x_t}, mediator family only
    double weight = 0.0;
};

/// Response-function mixture within covariate cell z, flattened to unit types.
std::vector<Unit> units(const ScmSpec& scm, std::size_t z) {
    std::vector<Unit> out;
    if (scm.family == GraphFamily::nondesc) {
        for (std::size_t r = 0; r < scm.outcome_response[z].size(); ++r) {
            Unit u;
            for (int t = 0; t < scm.nx; ++t) u.y.push_back(response_value(r, t, scm.ny));
            u.weight = scm.outcome_response[z][r];
            out.push_back(std::move(u));
        }
        return out;
    }
    for (std::size_t rw = 0; rw < scm.mediator_response[z].size(); ++rw)
        for (std::size_t ry = 0; ry < scm.outcome_given_mediator[z].size(); ++ry) {
            Unit u;
            for (int t = 0; t < scm.nx; ++t) {
                const int w = response_value(rw, t, scm.nw);
                u.w.push_back(w);
                u.y.push_back(response_value(ry, w, scm.ny));
            }
            u.weight = scm.mediator_response[z][rw] * scm.outcome_given_mediator[z][ry];
            out.push_back(std::move(u));
        }
    return out;
}

}  // namespace

int response_value(std::size_t r, int a, int out_card) {
    return static_cast<int>((r / ipow(out_card, a)) % static_cast<std::size_t>(out_card));
}

std::size_t ScmSpec::z_count() const {
    std::size_t n = 1;
    for (int c : z_cards) n *= static_cast<std::size_t>(c);
    return n;
}

std::vector<int> ScmSpec::z_values(std::size_t z) const {
    std::vector<int> out(z_cards.size());
    for (std::size_t i = z_cards.size(); i-- > 0;) {
        out[i] = static_cast<int>(z % static_cast<std::size_t>(z_cards[i]));
        z /= static_cast<std::size_t>(z_cards[i]);
    }
    return out;
}

double ScmSpec::z_probability(std::size_t z) const {
    const auto values = z_values(z);
    double p = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) p *= covariate_priors[i][values[i]];
    return p;
}

Schema ScmSpec::schema() const {
    if (family == GraphFamily::nondesc) return Schema::simple(nx, ny, z_cards);
    return Schema::simple(nx, ny, z_cards, Role::backdoor_covariate, nw);
}

void ScmSpec::validate() const {
    if (nx < 2 || ny < 2) throw ArgumentError("cardinalities must be at least 2");
    if (covariate_priors.size() != z_cards.size())
        throw ArgumentError("one prior per covariate is required");
    for (std::size_t i = 0; i < z_cards.size(); ++i)
        check_rows({covariate_priors[i]}, 1, static_cast<std::size_t>(z_cards[i]), "covariate prior");
    const auto nz = z_count();
    check_rows(treatment_cpt, nz, static_cast<std::size_t>(nx), "treatment cpt");
    if (family == GraphFamily::nondesc) {
        check_rows(outcome_response, nz, ipow(ny, nx), "outcome response");
    } else {
        if (nw < 2) throw ArgumentError("mediator cardinality must be at least 2");
        check_rows(mediator_response, nz, ipow(nw, nx), "mediator response");
        check_rows(outcome_given_mediator, nz, ipow(ny, nw), "outcome-given-mediator response");
    }
}

ScmSpec sample_scm(GraphFamily family, const ScmCardinalities& cards, std::size_t m,
                   std::uint64_t seed) {
    if (cards.nx < 2 || cards.ny < 2 || cards.nz < 2 ||
        (family == GraphFamily::mediator && cards.nw < 2))
        throw ArgumentError("cardinalities must be at least 2");
    std::mt19937_64 rng(seed);
    ScmSpec scm;
    scm.family = family;
    scm.nx = cards.nx;
    scm.ny = cards.ny;
    scm.nw = family == GraphFamily::mediator ? cards.nw : 0;
    scm.z_cards.assign(m, cards.nz);
    for (std::size_t i = 0; i < m; ++i)
        scm.covariate_priors.push_back(flat_dirichlet(rng, static_cast<std::size_t>(cards.nz)));
    const auto nz = scm.z_count();
    for (std::size_t z = 0; z < nz; ++z)
        scm.treatment_cpt.push_back(flat_dirichlet(rng, static_cast<std::size_t>(cards.nx)));
    for (std::size_t z = 0; z < nz; ++z) {
        if (family == GraphFamily::nondesc) {
            scm.outcome_response.push_back(flat_dirichlet(rng, ipow(cards.ny, cards.nx)));
        } else {
            scm.mediator_response.push_back(flat_dirichlet(rng, ipow(cards.nw, cards.nx)));
            scm.outcome_given_mediator.push_back(flat_dirichlet(rng, ipow(cards.ny, cards.nw)));
        }
    }
    return scm;
}

CounterfactualSpace ground_truth_space(const ScmSpec& scm) {
    if (scm.family == GraphFamily::nondesc)
        return CounterfactualSpace::nondescendant_layout(scm.nx, scm.ny, scm.z_cards);
    return CounterfactualSpace::mediator_layout(scm.nx, scm.ny, scm.nw, scm.z_cards);
}

std::vector<double> ground_truth_joint(const ScmSpec& scm) {
    scm.validate();
    const auto space = ground_truth_space(scm);
    std::vector<double> joint(space.total_size(), 0.0);
    std::vector<int> assign(space.axis_count(), 0);
    for (std::size_t z = 0; z < scm.z_count(); ++z) {
        const double pz = scm.z_probability(z);
        const auto zv = scm.z_values(z);
        for (std::size_t i = 0; i < zv.size(); ++i) assign[space.covariate_axis(i)] = zv[i];
        for (const auto& u : units(scm, z)) {
            for (int t = 0; t < scm.nx; ++t) {
                assign[space.outcome_axis(t)] = u.y[t];
                if (!u.w.empty()) assign[space.mediator_axis(t)] = u.w[t];
            }
            for (int x = 0; x < scm.nx; ++x) {
                assign[space.treatment_axis()] = x;
                if (!u.w.empty()) assign[space.observed_mediator_axis()] = u.w[x];
                joint[space.flatten(assign)] += pz * scm.treatment_cpt[z][x] * u.weight;
            }
        }
    }
    return joint;
}

EvidenceSet scm_to_evidence(const ScmSpec& scm, Availability availability) {
    const auto schema = scm.schema();
    const auto space = ground_truth_space(scm);
    const auto joint = ground_truth_joint(scm);
    const std::size_t m = scm.z_cards.size();
    const bool mediator = scm.family == GraphFamily::mediator;

    struct Pattern {
        EvidenceKind kind;
        std::vector<std::size_t> covs;
        bool with_w;
    };
    std::vector<Pattern> patterns{{EvidenceKind::observational, {}, false},
                                  {EvidenceKind::experimental, {}, false}};
    std::vector<std::size_t> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = i;
    if (m > 0 && availability == Availability::joint) {
        patterns.push_back({EvidenceKind::observational, all, false});
        patterns.push_back({EvidenceKind::experimental, all, false});
    } else if (availability == Availability::covariate_specific) {
        for (std::size_t i = 0; i < m; ++i) {
            patterns.push_back({EvidenceKind::observational, {i}, false});
            patterns.push_back({EvidenceKind::experimental, {i}, false});
        }
    }
    if (mediator) patterns.push_back({EvidenceKind::observational, all, true});

    EvidenceSet evidence(schema);
    for (const auto& pat : patterns) {
        EvidenceFamily family(pat.kind, pat.covs, pat.with_w, schema);
        std::vector<double> acc(family.cell_count(), 0.0);
        std::vector<int> zsub(pat.covs.size());
        for (std::size_t cell = 0; cell < joint.size(); ++cell) {
            if (joint[cell] == 0.0) continue;
            const auto a = space.unflatten(cell);
            for (std::size_t k = 0; k < pat.covs.size(); ++k)
                zsub[k] = a[space.covariate_axis(pat.covs[k])];
            std::optional<int> w;
            if (pat.with_w) w = a[space.observed_mediator_axis()];
            if (pat.kind == EvidenceKind::observational) {
                const int x = a[space.treatment_axis()];
                acc[family.flat(x, a[space.outcome_axis(x)], w, zsub)] += joint[cell];
            } else {
                for (int t = 0; t < scm.nx; ++t)
                    acc[family.flat(t, a[space.outcome_axis(t)], std::nullopt, zsub)] += joint[cell];
            }
        }
        for (std::size_t c = 0; c < acc.size(); ++c) family.set_flat(c, acc[c]);
        evidence.add(std::move(family));
    }
    return evidence;
}

double true_poc(const ScmSpec& scm, const QuerySpec& query) {
    scm.validate();
    query.validate(scm.nx, scm.ny);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t z = 0; z < scm.z_count(); ++z) {
        const double pz = scm.z_probability(z);
        for (const auto& u : units(scm, z)) {
            if (query.kind == QueryKind::pns) {
                bool hit = true;
                for (auto [arm, y] : query.targets) hit = hit && u.y[arm] == y;
                if (hit) num += pz * u.weight;
                continue;
            }
            const auto [fx, fy] = query.factual;
            const auto [cx, cy] = query.counterfactual;
            if (u.y[fx] != fy) continue;
            const double mass = pz * scm.treatment_cpt[z][fx] * u.weight;
            den += mass;
            if (u.y[cx] == cy) num += mass;
        }
    }
    if (query.kind == QueryKind::pns) return num;
    if (den <= 0.0)
        throw UndefinedConditionalError(to_string(query.kind) +
                                        " is undefined: conditioning cell has probability 0");
    return num / den;
}

}  // namespace poc
