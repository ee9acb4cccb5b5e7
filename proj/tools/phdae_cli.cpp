#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "phdae/analysis.hpp"
#include "phdae/generate.hpp"
#include "phdae/h2.hpp"
#include "phdae/hinf.hpp"
#include "phdae/interpolate.hpp"
#include "phdae/io.hpp"
#include "phdae/kyp.hpp"
#include "phdae/rosenbrock.hpp"
#include "phdae/staircase.hpp"

using nlohmann::json;
using namespace phdae;

namespace {

void emit_error(const std::string& kind, const std::string& message) {
    json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << std::endl;
}

json shifts_to_json(const std::vector<Complex>& shifts) {
    json a = json::array();
    for (Complex s : shifts) a.push_back({s.real(), s.imag()});
    return a;
}

InterpolationData load_shifts(const std::string& file, Index m) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open shift file: " + file);
    json j;
    in >> j;
    InterpolationData data;
    const json& shifts = j.at("shifts");
    for (size_t i = 0; i < shifts.size(); ++i) {
        Complex s(shifts[i][0].get<double>(), shifts[i][1].get<double>());
        CVec b(m);
        if (j.contains("directions")) {
            const json& d = j.at("directions")[i];
            for (Index k = 0; k < m; ++k)
                b(k) = Complex(d[k][0].get<double>(), d[k][1].get<double>());
        } else {
            b.setZero();
            b(static_cast<Index>(i) % m) = 1.0;
        }
        data.add(s, b);
    }
    data.validate(m);
    return data;
}

void write_provenance(const std::string& dir, const ReducedModel& rom) {
    json p;
    p["method"] = rom.provenance.method;
    p["converged"] = rom.provenance.converged;
    p["q"] = rom.q;
    p["r_proper"] = rom.r_proper;
    p["shifts"] = shifts_to_json(rom.provenance.shifts);
    json hist = json::array();
    for (const auto& rec : rom.provenance.history) {
        json h;
        h["iteration"] = rec.iteration;
        h["shift_change"] = rec.shift_change;
        h["residual_max"] = rec.residual_max;
        h["shifts"] = shifts_to_json(rec.shifts);
        hist.push_back(h);
    }
    p["history"] = hist;
    std::ofstream out(std::filesystem::path(dir) / "provenance.json");
    out << p.dump(2) << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Structure-preserving model reduction for port-Hamiltonian "
                 "descriptor systems in staircase form"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a benchmark model bundle");
    std::string gen_category = "index-0", gen_out, gen_ladder;
    GeneratorSpec gspec;
    Index gen_cells = 10;
    double c_base = 1e-3, l_base = 1e-2, r_base = 10.0;
    gen->add_option("--category", gen_category,
                    "index-0|index-1|proper-index-2|improper-index-2|"
                    "proper-index-1-2|improper-index-1-2");
    gen->add_option("--n1", gspec.n1);
    gen->add_option("--n2", gspec.n2);
    gen->add_option("--n3", gspec.n3);
    gen->add_option("--n4", gspec.n4);
    gen->add_option("--m", gspec.m);
    gen->add_option("--seed", gspec.seed);
    gen->add_option("--bandwidth", gspec.bandwidth);
    gen->add_option("--ladder", gen_ladder, "index1|index12 (RCL ladder variant)");
    gen->add_option("--cells", gen_cells);
    gen->add_option("--c-base", c_base);
    gen->add_option("--l-base", l_base);
    gen->add_option("--r-base", r_base);
    gen->add_option("--out", gen_out)->required();

    // validate
    auto* val = app.add_subcommand("validate", "Validate a model bundle");
    std::string val_dir;
    double val_tol = 1e-10;
    val->add_option("dir", val_dir)->required();
    val->add_option("--tol", val_tol);

    // info
    auto* info = app.add_subcommand("info", "Print model facts as JSON");
    std::string info_dir;
    info->add_option("dir", info_dir)->required();

    // reduce
    auto* red = app.add_subcommand("reduce", "Reduce a model bundle");
    std::string red_dir, red_out, red_method = "fixed", red_shifts;
    Index red_order = 10;
    int red_max_iter = 100;
    double red_tol = 1e-6;
    bool red_kyp_minus = false;
    red->add_option("dir", red_dir)->required();
    red->add_option("--method", red_method, "fixed|irka|trksm|iha");
    red->add_option("--order", red_order)->required();
    red->add_option("--shifts", red_shifts, "JSON file with shifts/directions");
    red->add_option("--max-iter", red_max_iter);
    red->add_option("--tol", red_tol);
    red->add_flag("--kyp-minus", red_kyp_minus,
                  "use the minimal-KYP representation change");
    red->add_option("--out", red_out)->required();

    // response
    auto* resp = app.add_subcommand("response", "Frequency response to CSV");
    std::string resp_dir, resp_out;
    double fmin = 1e-2, fmax = 1e4;
    Index rpoints = 200;
    resp->add_option("dir", resp_dir)->required();
    resp->add_option("--fmin", fmin);
    resp->add_option("--fmax", fmax);
    resp->add_option("--points", rpoints);
    resp->add_option("--out", resp_out)->required();

    // error
    auto* err = app.add_subcommand("error", "Error norms between two bundles");
    std::string err_fom, err_rom, err_norm = "both", err_out;
    err->add_option("fom", err_fom)->required();
    err->add_option("rom", err_rom)->required();
    err->add_option("--norm", err_norm, "h2|hinf|both");
    err->add_option("--out", err_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*gen) {
        StaircaseSystem sys;
        if (!gen_ladder.empty()) {
            LadderVariant variant;
            if (gen_ladder == "index1")
                variant = LadderVariant::Index1Like;
            else if (gen_ladder == "index12")
                variant = LadderVariant::Index12Like;
            else
                throw StructuralError("unknown ladder variant: " + gen_ladder);
            LadderParams params =
                LadderParams::make(gen_cells, c_base, l_base, r_base, gspec.seed);
            sys = generate_rcl_ladder(gen_cells, params, variant);
        } else {
            gspec.category = category_from_string(gen_category);
            sys = generate_staircase(gspec);
        }
        save_model(sys, gen_out);
        return 0;
    }
    if (*val) {
        StaircaseSystem sys = load_model(val_dir);
        ValidationReport rep = validate_staircase(sys, val_tol);
        std::cout << rep.summary() << std::endl;
        return rep.valid() ? 0 : 1;
    }
    if (*info) {
        StaircaseSystem sys = load_model(info_dir);
        OperatorBlocks blocks = assemble_operator_blocks(sys);
        Mat dinf = dinf_closed_form(blocks, sys.E11);
        auto [Linf, q] = factor_dinf(dinf);
        json out;
        out["n1"] = sys.n1;
        out["n2"] = sys.n2;
        out["n3"] = sys.n3;
        out["n4"] = sys.n4;
        out["n"] = sys.n();
        out["m"] = sys.m;
        out["index"] = differentiation_index(sys);
        out["rank_dinf"] = q;
        out["nnz_E"] = sys.E().nonZeros();
        out["nnz_J"] = sys.J().nonZeros();
        out["nnz_R"] = sys.R().nonZeros();
        std::cout << out.dump(2) << std::endl;
        return 0;
    }
    if (*red) {
        StaircaseSystem sys = load_model(red_dir);
        InterpolationData data = red_shifts.empty()
                                     ? default_interpolation_data(red_order, sys.m)
                                     : load_shifts(red_shifts, sys.m);
        ReducedModel rom;
        Mat xminus;
        const Mat* transform = nullptr;
        if (red_kyp_minus) {
            if (red_method != "fixed" && red_method != "irka")
                throw StructuralError(
                    "--kyp-minus supports only the fixed and irka methods");
            xminus = minimal_kyp_solution(extract_proper(sys)).X;
            transform = &xminus;
        }
        if (red_method == "fixed") {
            if (transform) {
                TangentialBasis basis = tangential_basis(sys, data);
                orthonormalize_v2(basis);
                ReductionMatrices wv =
                    reduction_matrix_minus(sys, basis.V2bar, xminus);
                ReducedParts parts = reduce(sys, wv);
                auto [Linf, q] = factor_dinf(parts.Dinf);
                rom = assemble_rom(parts, Linf, q);
                rom.provenance.method = "fixed+kyp-minus";
                rom.provenance.shifts = data.shifts;
            } else {
                rom = interpolate(sys, data);
            }
        } else if (red_method == "irka") {
            IrkaOptions opts;
            opts.max_iter = red_max_iter;
            opts.shift_tol = red_tol;
            IrkaOutput out = irka_ph(sys, data, opts, transform);
            rom = out.model;
            if (transform) rom.provenance.method = "irka+kyp-minus";
        } else if (red_method == "trksm") {
            InterpolationData init = default_interpolation_data(
                std::min<Index>(2, red_order - 1), sys.m);
            TrksmOutput out =
                trksm_ph(sys, init, red_order, default_region());
            rom = out.model;
        } else if (red_method == "iha") {
            IrkaOptions iopts;
            iopts.max_iter = red_max_iter;
            iopts.shift_tol = red_tol;
            IhaOutput out = iha_ph(sys, data, iopts);
            rom = out.model;
        } else {
            throw StructuralError("unknown method: " + red_method);
        }
        save_model(rom.sys, red_out);
        write_provenance(red_out, rom);
        return 0;
    }
    if (*resp) {
        StaircaseSystem sys = load_model(resp_dir);
        FrequencyResponse fr = sigma_response(sys, log_grid(fmin, fmax, rpoints));
        std::ofstream out(resp_out);
        if (!out) throw IoError("cannot open for writing: " + resp_out);
        out << "omega";
        for (Index i = 0; i < sys.m; ++i)
            for (Index j = 0; j < sys.m; ++j)
                out << ",Re_H" << i + 1 << j + 1 << ",Im_H" << i + 1 << j + 1;
        out << ",sigma_max\n";
        out.precision(17);
        for (size_t k = 0; k < fr.frequencies.size(); ++k) {
            out << fr.frequencies[k];
            for (Index i = 0; i < sys.m; ++i)
                for (Index j = 0; j < sys.m; ++j)
                    out << "," << fr.values[k](i, j).real() << ","
                        << fr.values[k](i, j).imag();
            out << "," << fr.sigma[k] << "\n";
        }
        return 0;
    }
    if (*err) {
        StaircaseSystem fom = load_model(err_fom);
        StaircaseSystem rom = load_model(err_rom);
        ErrorReport rep;
        if (err_norm == "h2")
            rep = h2_error(fom, rom);
        else if (err_norm == "hinf")
            rep = hinf_error(fom, rom);
        else if (err_norm == "both")
            rep = error_norms(fom, rom);
        else
            throw StructuralError("unknown norm: " + err_norm);
        json out;
        if (rep.h2_unbounded)
            out["h2"] = "unbounded (" + rep.reason + ")";
        else if (err_norm != "hinf")
            out["h2"] = rep.h2;
        if (rep.hinf_unbounded)
            out["hinf"] = "unbounded (" + rep.reason + ")";
        else if (err_norm != "h2") {
            out["hinf"] = rep.hinf;
            out["hinf_argmax_omega"] = rep.hinf_argmax_omega;
        }
        out["delta_dp_norm"] = rep.delta_dp_norm;
        out["delta_dinf_norm"] = rep.delta_dinf_norm;
        std::string text = out.dump(2);
        if (err_out.empty()) {
            std::cout << text << std::endl;
        } else {
            std::ofstream f(err_out);
            f << text << "\n";
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("PHDAE_NUM_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));
    try {
        return run(argc, argv);
    } catch (const StructuralError& e) {
        emit_error("structural", e.what());
        return 2;
    } catch (const NumericalError& e) {
        emit_error("numerical", e.what());
        return 3;
    } catch (const IoError& e) {
        emit_error("io", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 5;
    }
}
