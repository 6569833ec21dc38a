#include "biomark/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/rng.hpp"

namespace biomark {

const char* plant_kind_name(PlantKind k) {
    switch (k) {
        case PlantKind::linear_signal: return "linear_signal";
        case PlantKind::monotone_tautology: return "monotone_tautology";
        case PlantKind::composite: return "composite";
        case PlantKind::confounded: return "confounded";
        case PlantKind::outlier_driven: return "outlier_driven";
        case PlantKind::subgroup_inconsistent: return "subgroup_inconsistent";
    }
    return "?";
}

const ManifestEntry* Manifest::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

namespace {

void validate_spec(const CohortSpec& spec) {
    if (spec.n_participants < 3) throw ConfigError("cohort spec: too few participants");
    if (spec.missingness < 0.0 || spec.missingness >= 1.0)
        throw ConfigError("cohort spec: missingness outside [0,1)");
    std::set<std::string> names;
    for (const auto& p : spec.planted) {
        if (!names.insert(p.name).second)
            throw ConfigError("cohort spec: duplicate planted name " + p.name);
        if (std::fabs(p.target_rho) >= 1.0)
            throw ConfigError("cohort spec: target_rho outside (-1,1) for " + p.name);
        if (p.kind == PlantKind::subgroup_inconsistent && std::fabs(p.target_rho) > 0.2)
            throw ConfigError(
                "cohort spec: subgroup-inconsistent plants cannot also carry a strong "
                "marginal effect (" +
                p.name + ")");
    }
}

std::vector<double> normal_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.next_normal();
    return v;
}

double sample_spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return spearman(a, b).estimate;
}

// Mix signal and fresh noise, binary-searching the coefficient until the
// realized Spearman against `target` hits rho.  Throws when unreachable
// (e.g. a strong rho against a binary target).
std::vector<double> calibrated_mix(const std::vector<double>& signal,
                                   const std::vector<double>& noise,
                                   const std::vector<double>& target, double rho,
                                   const std::string& name, double* achieved) {
    const std::size_t n = signal.size();
    auto mixed = [&](double r) {
        std::vector<double> f(n);
        const double b = std::sqrt(std::max(0.0, 1.0 - r * r));
        for (std::size_t i = 0; i < n; ++i) f[i] = r * signal[i] + b * noise[i];
        return f;
    };
    double lo = -0.9999, hi = 0.9999;
    const double at_hi = sample_spearman(mixed(hi), target);
    const double at_lo = sample_spearman(mixed(lo), target);
    if (rho > at_hi + 1e-9 || rho < at_lo - 1e-9)
        throw ConfigError("cohort spec: target_rho " + std::to_string(rho) +
                          " unreachable for " + name);
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sample_spearman(mixed(mid), target) < rho)
            lo = mid;
        else
            hi = mid;
    }
    auto f = mixed(0.5 * (lo + hi));
    if (achieved) *achieved = sample_spearman(f, target);
    return f;
}

std::vector<double> standardized(const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    const double sd = var > 0 ? std::sqrt(var / double(v.size() - 1)) : 1.0;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
    return out;
}

}  // namespace

SynthResult generate(const CohortSpec& spec) {
    validate_spec(spec);
    const std::size_t np = spec.n_participants;
    const std::size_t n = spec.rows_total > 0 ? spec.rows_total : np;
    if (n < np) throw ConfigError("cohort spec: rows_total below participant count");

    // Row layout: the first (n - np) participants contribute one extra row.
    std::vector<std::string> pid;
    std::vector<std::string> wave;
    pid.reserve(n);
    const std::size_t extras = n - np;
    for (std::size_t p = 0; p < np; ++p) {
        const std::string id = "p" + std::to_string(p);
        const std::size_t rows = p < extras ? 2 : 1;
        for (std::size_t w = 0; w < rows; ++w) {
            pid.push_back(id);
            wave.push_back("w" + std::to_string(w + 1));
        }
    }
    const bool repeated = extras > 0;

    // Confounder demographics named by the planted effects.
    std::vector<std::string> confounder_names;
    for (const auto& p : spec.planted)
        if (p.kind == PlantKind::confounded &&
            std::find(confounder_names.begin(), confounder_names.end(), p.confounder) ==
                confounder_names.end())
            confounder_names.push_back(p.confounder);

    // Participant-level latents.
    Rng latent_rng(spec.seed, "latent");
    std::vector<double> u(np);
    for (auto& x : u) x = latent_rng.next_normal();
    std::vector<std::vector<double>> conf_p(confounder_names.size(), std::vector<double>(np));
    for (auto& col : conf_p)
        for (auto& x : col) x = latent_rng.next_normal();

    Rng demo_rng(spec.seed, "demo");
    std::vector<double> age_p(np);
    std::vector<std::string> sex_p(np);
    for (std::size_t p = 0; p < np; ++p) {
        age_p[p] = 45.0 + 12.0 * demo_rng.next_normal();
        sex_p[p] = demo_rng.next_double() < 0.5 ? "F" : "M";
    }

    // Row-level latent target with a participant random effect, plus the
    // confounder contributions (loading 0.5 each, then renormalized).
    Rng row_rng(spec.seed, "row-noise");
    std::vector<double> latent(n);
    std::vector<std::size_t> row_participant(n);
    {
        std::size_t r = 0;
        for (std::size_t p = 0; p < np; ++p) {
            const std::size_t rows = p < extras ? 2 : 1;
            for (std::size_t w = 0; w < rows; ++w, ++r) {
                row_participant[r] = p;
                latent[r] = repeated
                                ? std::sqrt(0.6) * u[p] + std::sqrt(0.4) * row_rng.next_normal()
                                : u[p];
            }
        }
    }
    const double norm = std::sqrt(1.0 + 0.25 * double(confounder_names.size()));
    std::vector<double> t_tot(n);
    for (std::size_t r = 0; r < n; ++r) {
        double s = latent[r];
        for (std::size_t c = 0; c < confounder_names.size(); ++c)
            s += 0.5 * conf_p[c][row_participant[r]];
        t_tot[r] = s / norm;
    }

    // Observed target.
    std::vector<double> target(n);
    if (spec.task == TaskType::regression) {
        for (std::size_t r = 0; r < n; ++r) target[r] = 10.0 + 4.0 * t_tot[r];
    } else {
        for (std::size_t r = 0; r < n; ++r) target[r] = t_tot[r] > 0.0 ? 1.0 : 0.0;
    }

    Dataset ds(spec.task, n);
    ds.set_participant_ids(pid);
    ds.set_target(target);
    if (repeated) ds.set_group(wave);

    std::vector<double> age(n), conf_row(n);
    std::vector<std::string> sex(n);
    for (std::size_t r = 0; r < n; ++r) {
        age[r] = age_p[row_participant[r]];
        sex[r] = sex_p[row_participant[r]];
    }
    ds.add_demographic("age", age);
    for (std::size_t c = 0; c < confounder_names.size(); ++c) {
        for (std::size_t r = 0; r < n; ++r) conf_row[r] = conf_p[c][row_participant[r]];
        ds.add_demographic(confounder_names[c], conf_row);
    }
    ds.add_subgroup("sex", sex);

    Manifest manifest;

    for (const auto& plant : spec.planted) {
        Rng frng(spec.seed, "feature", plant.name);
        ManifestEntry entry;
        entry.name = plant.name;
        entry.kind = plant.kind;
        entry.target_rho = plant.target_rho;

        switch (plant.kind) {
            case PlantKind::linear_signal: {
                const auto noise = normal_vec(frng, n);
                auto f = calibrated_mix(t_tot, noise, target, plant.target_rho, plant.name,
                                        &entry.achieved_rho);
                ds.add_feature(plant.name, std::move(f));
                break;
            }
            case PlantKind::monotone_tautology: {
                std::vector<double> f(n);
                for (std::size_t r = 0; r < n; ++r) f[r] = std::exp(target[r] / 10.0);
                entry.achieved_rho = sample_spearman(f, target);
                ds.add_feature(plant.name, std::move(f));
                break;
            }
            case PlantKind::composite: {
                // Two components sharing most of their noise, so the
                // composite barely outperforms its strongest component.
                const auto shared = normal_vec(frng, n);
                double a1 = 0, a2 = 0;
                std::vector<double> comps[2];
                for (int c = 0; c < 2; ++c) {
                    const auto own = normal_vec(frng, n);
                    std::vector<double> mixed_noise(n);
                    for (std::size_t i = 0; i < n; ++i)
                        mixed_noise[i] = std::sqrt(0.8) * shared[i] + std::sqrt(0.2) * own[i];
                    comps[c] = calibrated_mix(t_tot, mixed_noise, target, plant.component_rho,
                                              plant.name, c == 0 ? &a1 : &a2);
                }
                const std::string n1 = plant.name + "_comp1", n2 = plant.name + "_comp2";
                std::vector<double> composite(n);
                const auto z1 = standardized(comps[0]), z2 = standardized(comps[1]);
                for (std::size_t i = 0; i < n; ++i) composite[i] = 0.5 * (z1[i] + z2[i]);

                ds.add_feature(n1, std::move(comps[0]));
                ds.add_feature(n2, std::move(comps[1]));
                entry.achieved_rho = sample_spearman(composite, target);
                FeatureMeta meta;
                meta.kind = FeatureKind::composite;
                ds.add_feature(plant.name, std::move(composite), meta);
                ds.set_feature_components(plant.name, {n1, n2});
                entry.components = {n1, n2};

                ManifestEntry c1{n1, PlantKind::linear_signal, plant.component_rho, a1, {}, "", ""};
                ManifestEntry c2{n2, PlantKind::linear_signal, plant.component_rho, a2, {}, "", ""};
                manifest.entries.push_back(c1);
                manifest.entries.push_back(c2);
                break;
            }
            case PlantKind::confounded: {
                std::vector<double> conf(n);
                std::size_t ci = 0;
                while (confounder_names[ci] != plant.confounder) ++ci;
                for (std::size_t r = 0; r < n; ++r) conf[r] = conf_p[ci][row_participant[r]];
                const auto noise = normal_vec(frng, n);
                auto f = calibrated_mix(conf, noise, target, plant.target_rho, plant.name,
                                        &entry.achieved_rho);
                entry.confounder = plant.confounder;
                ds.add_feature(plant.name, std::move(f));
                break;
            }
            case PlantKind::outlier_driven: {
                // Noise feature plus one extreme participant placed at the
                // extreme of the target; resample until removing that
                // participant flips the sign of the association.
                std::size_t star = 0;
                for (std::size_t r = 1; r < n; ++r)
                    if (target[r] > target[star]) star = r;
                const std::size_t star_p = row_participant[star];
                std::vector<std::size_t> others;
                std::vector<double> t_others;
                for (std::size_t r = 0; r < n; ++r)
                    if (row_participant[r] != star_p) {
                        others.push_back(r);
                        t_others.push_back(target[r]);
                    }

                bool done = false;
                std::vector<double> f;
                for (int attempt = 0; attempt < 5000 && !done; ++attempt) {
                    f = normal_vec(frng, n);
                    double fmax = f[0];
                    for (double v : f) fmax = std::max(fmax, v);
                    for (std::size_t r = 0; r < n; ++r)
                        if (row_participant[r] == star_p) f[r] = fmax + 5.0;

                    std::vector<double> f_others;
                    f_others.reserve(others.size());
                    for (std::size_t r : others) f_others.push_back(f[r]);
                    const double full = sample_spearman(f, target);
                    const double without = sample_spearman(f_others, t_others);
                    done = sign_of(full) != 0 && sign_of(without) != 0 &&
                           sign_of(full) != sign_of(without) && std::fabs(full) < 0.1;
                }
                if (!done)
                    throw ConfigError("cohort spec: outlier construction failed for " +
                                      plant.name);
                entry.achieved_rho = sample_spearman(f, target);
                entry.outlier_participant = "p" + std::to_string(star_p);
                ds.add_feature(plant.name, std::move(f));
                break;
            }
            case PlantKind::subgroup_inconsistent: {
                std::vector<double> f(n);
                if (plant.subgroup_axis) {
                    // Sign of the association flips with the sex subgroup;
                    // the marginal effect cancels.
                    for (std::size_t r = 0; r < n; ++r) {
                        const double s = sex_p[row_participant[r]] == "F" ? 1.0 : -1.0;
                        f[r] = s * 0.5 * t_tot[r] + 0.87 * frng.next_normal();
                    }
                } else {
                    // V-shape around the target median: positive association
                    // in the upper half, negative in the lower half.
                    std::vector<double> sorted = target;
                    std::sort(sorted.begin(), sorted.end());
                    const double med = sorted[n / 2];
                    for (std::size_t r = 0; r < n; ++r)
                        f[r] = std::fabs(target[r] - med) + 0.3 * frng.next_normal();
                }
                entry.achieved_rho = sample_spearman(f, target);
                ds.add_feature(plant.name, std::move(f));
                break;
            }
        }
        manifest.entries.push_back(std::move(entry));
    }

    for (std::size_t k = 0; k < spec.n_noise_features; ++k) {
        const std::string name = "noise_" + std::to_string(k);
        Rng frng(spec.seed, "feature", name);
        ds.add_feature(name, normal_vec(frng, n));
        manifest.noise_features.push_back(name);
    }

    if (spec.missingness > 0.0) {
        for (const auto& name : ds.feature_names()) {
            Rng mrng(spec.seed, "missing", name);
            auto col = ds.feature(name);
            for (auto& v : col)
                if (mrng.next_double() < spec.missingness) v = kMissing;
            ds.set_feature_values(name, std::move(col));
        }
    }

    ds.validate();
    return {std::move(ds), std::move(manifest)};
}

CohortSpec dwb_shape() {
    CohortSpec spec;
    spec.n_participants = 7497;
    spec.task = TaskType::regression;
    spec.missingness = 0.03;
    spec.seed = 1;
    spec.planted = {
        {"sleep_duration_var", PlantKind::linear_signal, 0.25, 0.3, ""},
        {"nocturnal_app_use", PlantKind::linear_signal, 0.20, 0.3, ""},
        {"polyphasic_sleep_pct", PlantKind::linear_signal, 0.15, 0.3, ""},
    };
    spec.n_noise_features = 197 - spec.planted.size();
    return spec;
}

CohortSpec globem_shape() {
    CohortSpec spec;
    spec.n_participants = 497;
    spec.rows_total = 704;
    spec.task = TaskType::regression;
    spec.missingness = 0.546;
    spec.seed = 2;
    spec.planted = {
        {"sleep_onset_var", PlantKind::linear_signal, 0.15, 0.3, ""},
        {"wifi_ap_diversity", PlantKind::linear_signal, 0.13, 0.3, ""},
    };
    spec.n_noise_features = 5508 - spec.planted.size();
    return spec;
}

CohortSpec wearme_shape() {
    CohortSpec spec;
    spec.n_participants = 1078;
    spec.task = TaskType::regression;
    spec.missingness = 0.001;
    spec.seed = 3;
    spec.planted = {
        {"crp", PlantKind::linear_signal, 0.39, 0.3, ""},
        {"fitness_index", PlantKind::composite, -0.37, -0.35, ""},
        {"rdw", PlantKind::linear_signal, 0.28, 0.3, ""},
    };
    spec.n_noise_features = 71 - 5;  // composite expands to three columns
    return spec;
}

}  // namespace biomark
