#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dbc/equiv.hpp"
#include "dbc/proof.hpp"
#include "dbc/ses.hpp"
#include "dbc/standardize.hpp"

using namespace dbc;

namespace {

class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Failure("cannot write " + path);
}

Expr read_expr(const std::string& path) {
    try {
        return parse(read_file(path));
    } catch (const ParseError& e) {
        throw Failure(path + ": " + e.what());
    }
}

std::string lts_text(const Lts& lts) {
    std::string out;
    for (std::size_t s = 0; s < lts.num_states; ++s) {
        out += "state " + std::to_string(s);
        if (!lts.exprs.empty()) out += "  " + print(lts.exprs[s]);
        out += "\n";
        for (Symbol x : lts.exposure[s]) out += "  exposes " + name_of(x) + "\n";
    }
    for (auto& t : lts.transitions)
        out += "  " + std::to_string(t.src) + " -" + t.act.name() + "-> " + std::to_string(t.dst) + "\n";
    return out;
}

std::string state_pair(std::uint32_t a, std::uint32_t b) {
    return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

struct Options {
    std::string rel = "rooted";
    std::size_t budget = kDefaultBudget;
    std::string cert;
    std::string format = "aut";
    std::vector<std::string> files;
};

int run_check(const Options& o) {
    Expr e = read_expr(o.files.at(0)), f = read_expr(o.files.at(1));
    if (o.rel == "rooted") {
        RootedResult r = rooted_equal(e, f, o.budget);
        if (r.equal) {
            std::cout << "equivalent (rooted)\n";
            return 0;
        }
        std::cerr << "inequivalent: " << r.clause << " at " << state_pair(0, 1) << ": " << r.detail << "\n";
        return 1;
    }
    EquivKind kind = o.rel == "strong" ? EquivKind::Strong : o.rel == "branching" ? EquivKind::Branching : EquivKind::Dpbb;
    Lts lts = build_lts({e, f}, o.budget);
    Partition p = bisimilarity(lts, kind);
    if (p.same(lts.roots[0], lts.roots[1])) {
        std::cout << "equivalent (" << kind_name(kind) << ")\n";
        return 0;
    }
    std::cerr << "inequivalent: " << kind_name(kind) << " separates " << state_pair(lts.roots[0], lts.roots[1]) << "\n";
    return 1;
}

int run_prove(const Options& o) {
    Expr e = read_expr(o.files.at(0)), f = read_expr(o.files.at(1));
    CongruenceResult r = prove_congruent(e, f, o.budget);
    if (!r.equal) {
        std::cout << "INEQ " << r.refutation.clause << " " << state_pair(0, 1) << "\n  " << r.refutation.detail << "\n";
        return 1;
    }
    std::string text = write_certificate(r.proof);
    if (!o.cert.empty()) write_file(o.cert, text);
    std::cout << text;
    return 0;
}

int run_verify(const Options& o) {
    Derivation d;
    try {
        d = read_certificate(read_file(o.files.at(0)));
    } catch (const ParseError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    }
    if (d.empty()) {
        std::cerr << "invalid: empty certificate\n";
        return 1;
    }
    CheckResult c = check(d);
    if (!c.ok) {
        std::cerr << "invalid: step " << c.step << ": " << c.reason << "\n";
        return 1;
    }
    Equation concl = d.conclusion();
    if (o.files.size() == 3) {
        Expr e = read_expr(o.files[1]), f = read_expr(o.files[2]);
        if (concl.lhs != e || concl.rhs != f) {
            std::cerr << "invalid: conclusion does not match the given expressions\n";
            return 1;
        }
    }
    std::cout << "valid: " << d.steps.size() << " steps, " << print(concl.lhs) << " = " << print(concl.rhs) << "\n";
    return 0;
}

int run_std(const Options& o) {
    Expr e = read_expr(o.files.at(0));
    Standardized s = standardize(e);
    write_file(o.cert.empty() ? o.files[0] + ".cert" : o.cert, write_certificate(s.proof));
    std::cout << print(s.sum.to_expr()) << "\n";
    return 0;
}

int run_lts(const Options& o, bool quotient) {
    Lts lts = build_lts(read_expr(o.files.at(0)), o.budget);
    if (quotient) lts = minimize(lts);
    std::cout << (o.format == "text" ? lts_text(lts) : to_aut(lts));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivalence checker and proof certifier for finite-state process expressions"};
    app.require_subcommand(1);
    Options o;
    auto budget = [&](CLI::App* c) {
        c->add_option("--budget", o.budget, "state budget for transition systems")->capture_default_str();
    };

    CLI::App* check_cmd = app.add_subcommand("check", "decide an equivalence");
    check_cmd->add_option("--rel", o.rel, "relation")
        ->check(CLI::IsMember({"strong", "branching", "dpbb", "rooted"}))
        ->capture_default_str();
    check_cmd->add_option("files", o.files, "two expression files")->required()->expected(2);
    budget(check_cmd);

    CLI::App* prove_cmd = app.add_subcommand("prove", "print a certificate of e = f");
    prove_cmd->add_option("files", o.files, "two expression files")->required()->expected(2);
    prove_cmd->add_option("--cert", o.cert, "also write the certificate here");
    budget(prove_cmd);

    CLI::App* verify_cmd = app.add_subcommand("verify", "check a certificate");
    verify_cmd->add_option("files", o.files, "certificate, optionally followed by the two expression files")
        ->required()
        ->expected(1, 3);

    CLI::App* std_cmd = app.add_subcommand("std", "print the standard sum and write FILE.cert");
    std_cmd->add_option("files", o.files, "expression file")->required()->expected(1);
    std_cmd->add_option("--cert", o.cert, "certificate path instead of FILE.cert");

    CLI::App* lts_cmd = app.add_subcommand("lts", "dump the transition system");
    CLI::App* min_cmd = app.add_subcommand("minimize", "dump the dpbb quotient");
    for (CLI::App* c : {lts_cmd, min_cmd}) {
        c->add_option("files", o.files, "expression file")->required()->expected(1);
        c->add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "aut"}))->capture_default_str();
        budget(c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (check_cmd->parsed()) return run_check(o);
        if (prove_cmd->parsed()) return run_prove(o);
        if (verify_cmd->parsed()) {
            if (o.files.size() == 2) throw Failure("verify takes a certificate and optionally two expression files");
            return run_verify(o);
        }
        if (std_cmd->parsed()) return run_std(o);
        if (lts_cmd->parsed()) return run_lts(o, false);
        if (min_cmd->parsed()) return run_lts(o, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
