// order-density: exact and empirical densities of primes at which a rational
// point reduces to order coprime to a fixed prime ell.
//
// Commands: exact | series | measure | simulate | empirical | verify
// Exit codes: 0 success, 2 usage error, 3 size guard exceeded, 4 verification failure.

#include "orderdens/jsonio.hpp"
#include "orderdens/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace od = orderdens;

namespace {

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void emit(const od::Json& payload, const std::string& out_path) {
    od::Json j = payload;
    j["generated_at"] = timestamp();
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) od::write_json_file(out_path, j);
}

od::ImageType parse_image_or_throw(const std::string& s) {
    auto img = od::parse_image(s);
    if (!img) throw CLI::ValidationError("--image", "unknown image type \"" + s + "\"");
    return *img;
}

// Tables at (level, level+1) for a spec that can be rebuilt one level higher.
std::pair<od::MeasureTable, od::MeasureTable> spec_table_pair(const od::Json& spec,
                                                              int threads) {
    od::MatrixGroupLevel lo = od::build_group(spec);
    od::Json hi_spec = spec;
    hi_spec["level"] = spec.at("level").get<int>() + 1;
    if (spec.at("mode").get<std::string>() == "generated")
        throw std::invalid_argument(
            "measure --fit: a generated group does not determine the next level; "
            "use mode=preimage with base generators");
    od::MatrixGroupLevel hi = od::build_group(hi_spec);
    return {od::measure_table(lo, threads), od::measure_table(hi, threads)};
}

// Exact series density of a group spec.  Preimage specs are scanned without
// materializing the higher level; normalizer-structured bases get the
// per-coset treatment with the merged half/half sum.
od::Rational spec_series_density(const od::Json& spec, int defect, int threads) {
    int64_t ell = spec.at("ell").get<int64_t>();
    int level = spec.at("level").get<int>();
    od::Rational failure(od::pow_big(od::BigInt(ell), 2LL * defect));
    od::DeltaRule rule = od::DefectRule{defect};

    if (spec.at("mode").get<std::string>() == "preimage") {
        od::Json base_spec = spec;
        base_spec["level"] = spec.value("base_level", 1);
        base_spec["mode"] = spec.value("base_mode",
                                       spec.contains("generators") ? std::string("generated")
                                                                   : std::string("full"));
        od::MatrixGroupLevel base = od::build_group(base_spec);
        if (spec.value("lift", std::string("full")) == "cartan") {
            if (!base.frame && !base.cartan_params) base.frame = od::detect_normalizer_frame(base);
            if (!base.frame && !base.cartan_params)
                throw std::invalid_argument("series: cartan lift needs a normalizer-structured base");
            auto [clo, slo] = od::lifted_coset_tables(base, level, threads);
            auto [chi, shi] = od::lifted_coset_tables(base, level + 1, threads);
            return od::sum_series_pair(od::fit_tail(clo, chi), od::fit_tail(slo, shi), ell,
                                       failure, rule);
        }
        od::TailModel model = od::fit_tail(od::lifted_measure_table(base, level, 4, threads),
                                           od::lifted_measure_table(base, level + 1, 4, threads));
        return od::sum_series(model, ell, failure, rule);
    }
    auto [lo, hi] = spec_table_pair(spec, threads);
    return od::sum_series(od::fit_tail(lo, hi), ell, failure, rule);
}

int cmd_verify(bool skip_empirical, int threads, long long bound) {
    od::VerifyOptions opts;
    opts.skip_empirical = skip_empirical;
    opts.threads = threads;
    opts.empirical_bound = bound;
    auto results = od::run_acceptance(opts);
    bool pass = od::all_passed(results);
    for (const auto& r : results) {
        std::printf("C%d %-4s %-62s (%.1fs)%s%s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.seconds, r.detail.empty() ? "" : " -- ",
                    r.detail.c_str());
    }
    std::printf("verify: %s\n", pass ? "all criteria passed" : "FAILURES PRESENT");
    return pass ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact density of primes with point order coprime to ell"};
    app.require_subcommand(1);
    app.fallthrough(); // let subcommands pass --threads up to the main app
    int threads = 2;
    app.add_option("--threads", threads, "worker cap for per-element scans")
        ->capture_default_str();

    // exact
    auto* exact = app.add_subcommand("exact", "closed-formula density for a standard image");
    std::string image_str, out_path;
    int64_t ell = 2;
    int defect = 0;
    exact->add_option("--image", image_str, "gl2 | split | nonsplit | norm-split | norm-nonsplit")
        ->required();
    exact->add_option("--ell", ell, "the prime ell")->required();
    exact->add_option("--defect", defect, "Kummer defect d >= 0")->capture_default_str();
    exact->add_option("-o,--out", out_path, "also write the JSON report here");

    // series
    auto* series = app.add_subcommand("series", "exact density as a fitted, exactly summed series");
    std::string series_image, series_group, series_out;
    int series_defect = 0;
    int64_t series_ell = 2;
    series->add_option("--image", series_image, "standard image type (derived tables)");
    series->add_option("--group", series_group, "group spec JSON file");
    series->add_option("--ell", series_ell, "the prime ell (with --image)");
    series->add_option("--defect", series_defect, "Kummer defect d >= 0")->capture_default_str();
    series->add_option("-o,--out", series_out, "also write the JSON report here");

    // measure
    auto* measure = app.add_subcommand("measure", "measure table (and tail model) of a group spec");
    std::string group_path, measure_out;
    bool do_fit = false;
    measure->add_option("--group", group_path, "group spec JSON file")->required();
    measure->add_flag("--fit", do_fit, "also fit the geometric tail model");
    measure->add_option("-o,--out", measure_out, "also write the JSON report here");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "density interval of an arboreal spec");
    std::string arb_path, sim_out;
    simulate->add_option("--arboreal", arb_path, "arboreal spec JSON file")->required();
    simulate->add_option("-o,--out", sim_out, "also write the JSON report here");

    // empirical
    auto* empirical = app.add_subcommand("empirical", "prime sweep over a curve spec");
    std::string curve_path, csv_path, emp_out, exact_ref;
    int64_t emp_ell = 2;
    long long bound = 100000;
    int scale = 0;
    empirical->add_option("--curve", curve_path, "curve spec JSON file")->required();
    empirical->add_option("--ell", emp_ell, "the prime ell")->required();
    empirical->add_option("--bound", bound, "sweep primes p <= bound")->capture_default_str();
    empirical->add_option("--scale", scale, "replace the point by ell^k * point")
        ->capture_default_str();
    empirical->add_option("--csv", csv_path, "write per-prime rows (p,N,ord,v_ell) here");
    empirical->add_option("--exact", exact_ref, "exact reference density num/den");
    empirical->add_option("-o,--out", emp_out, "also write the JSON report here");

    // verify
    auto* verify = app.add_subcommand("verify", "replay the full fixture suite");
    std::string suite = "paper";
    std::vector<std::string> skips;
    long long verify_bound = 100000;
    verify->add_option("--suite", suite, "suite name")->capture_default_str();
    verify->add_option("--skip", skips, "subsets to skip (empirical)");
    verify->add_option("--bound", verify_bound, "empirical sweep bound")->capture_default_str();

    try {
        app.parse(argc, argv);

        if (*exact) {
            od::ImageType img = parse_image_or_throw(image_str);
            od::Rational v = od::closed_density(img, ell, defect);
            emit(od::density_json(v, "closed", ell, defect, od::image_name(img)), out_path);
            return 0;
        }
        if (*series) {
            if (series_image.empty() == series_group.empty())
                throw CLI::ValidationError("series", "give exactly one of --image / --group");
            if (!series_image.empty()) {
                od::ImageType img = parse_image_or_throw(series_image);
                od::Rational v = od::derived_series_density(img, series_ell, series_defect, threads);
                emit(od::density_json(v, "series", series_ell, series_defect, od::image_name(img)),
                     series_out);
                return 0;
            }
            od::Json spec = od::load_json_file(series_group);
            int64_t gell = spec.at("ell").get<int64_t>();
            try {
                od::Rational v = spec_series_density(spec, series_defect, threads);
                emit(od::density_json(v, "series", gell, series_defect, "explicit-group"),
                     series_out);
            } catch (const od::FitRejection& e) {
                od::MatrixGroupLevel g = od::build_group(spec);
                od::MeasureTable t = od::measure_table(g, threads);
                od::Rational f(od::pow_big(od::BigInt(gell), 2LL * series_defect));
                od::Rational lo_sum(0);
                od::BigInt l(gell);
                for (const auto& [cell, mu] : t.mu) {
                    auto [a, b] = cell;
                    long long e = 2LL * series_defect + std::max(a - series_defect, 0) +
                                  std::max(a + b - series_defect, 0);
                    lo_sum += mu / od::Rational(od::pow_big(l, e));
                }
                lo_sum *= f;
                od::Json j = od::interval_json(lo_sum, lo_sum + t.undetermined * f, gell, t.level);
                j["note"] = std::string("tail fit rejected: ") + e.what();
                emit(j, series_out);
            }
            return 0;
        }
        if (*measure) {
            od::Json spec = od::load_json_file(group_path);
            if (do_fit) {
                auto [lo, hi] = spec_table_pair(spec, threads);
                od::Json j{{"table", od::measure_table_json(hi)},
                           {"tail", od::tail_model_json(od::fit_tail(lo, hi))}};
                emit(j, measure_out);
            } else {
                od::MatrixGroupLevel g = od::build_group(spec);
                emit(od::Json{{"table", od::measure_table_json(od::measure_table(g, threads))}},
                     measure_out);
            }
            return 0;
        }
        if (*simulate) {
            od::Json spec = od::load_json_file(arb_path);
            od::ArborealGroupLevel a = od::build_arboreal(spec);
            od::Rational tail = od::singular_mass(a.matrix_projection(), a.mod().level);
            auto [lo, hi] = a.density_interval(tail);
            od::Json j = od::interval_json(lo, hi, a.mod().ell, a.mod().level);
            j["failure_constant"] = a.failure_constant().str();
            emit(j, sim_out);
            return 0;
        }
        if (*empirical) {
            auto [curve, point] = od::build_curve(od::load_json_file(curve_path));
            std::vector<od::SweepRow> rows;
            od::SweepReport rep = od::empirical_density(curve, point, emp_ell, bound, scale,
                                                        threads, csv_path.empty() ? nullptr : &rows);
            if (!exact_ref.empty()) rep.exact_reference = od::Rational::parse(exact_ref);
            if (!csv_path.empty()) {
                std::ofstream csv(csv_path);
                csv << "p,N,ord,v_ell\n";
                for (const auto& r : rows)
                    csv << r.p << "," << r.group_size << "," << r.order << "," << r.v_ell << "\n";
            }
            emit(od::sweep_json(rep), emp_out);
            return 0;
        }
        if (*verify) {
            if (suite != "paper")
                throw CLI::ValidationError("--suite", "only the \"paper\" suite exists");
            bool skip_emp = false;
            for (const auto& s : skips)
                if (s == "empirical") skip_emp = true;
            return cmd_verify(skip_emp, threads, verify_bound);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const od::SizeGuardExceeded& e) {
        std::cerr << "size guard: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
