// SPDX-License-Identifier: Apache-2.0
//
// clog: exact real calculator over continued-logarithm digit streams.

#include <clog/clog.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace cli = contlog::cli;

int main(int argc, char** argv) {
    CLI::App app{"exact real arithmetic on continued logarithms"};
    app.require_subcommand(1);

    std::uint64_t fuel = cli::fuel_from_env();
    unsigned digits = cli::default_digits;
    std::size_t count = cli::default_count;
    std::string form = "compact";
    std::string to = "rational";
    std::string expr_text, expr_b, value_text;

    auto* eval = app.add_subcommand("eval", "evaluate an expression to a certified decimal");
    eval->add_option("expr", expr_text, "expression")->required();
    eval->add_option("--digits", digits, "decimal places");
    eval->add_option("--fuel", fuel, "input digits per output digit");

    auto* terms = app.add_subcommand("terms", "stream continued-logarithm terms");
    terms->add_option("expr", expr_text, "expression")->required();
    terms->add_option("--count", count, "terms (compact) or digits (binary)");
    terms->add_option("--form", form, "compact|binary")->check(CLI::IsMember({"compact", "binary"}));
    terms->add_option("--fuel", fuel, "input digits per output digit");

    auto* convert = app.add_subcommand("convert", "convert between representations");
    convert->add_option("value", value_text, "rational, compact or digit text")->required();
    convert->add_option("--to", to, "rational|compact|binary")
        ->check(CLI::IsMember({"rational", "compact", "binary"}));

    auto* comp = app.add_subcommand("compare", "compare two expressions");
    comp->add_option("a", expr_text, "left expression")->required();
    comp->add_option("b", expr_b, "right expression")->required();
    comp->add_option("--fuel", fuel, "input digits per output digit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    cli::command_result r;
    if (eval->parsed())
        r = cli::cmd_eval(expr_text, digits, fuel);
    else if (terms->parsed())
        r = cli::cmd_terms(expr_text, count, form == "binary", fuel);
    else if (convert->parsed())
        r = cli::cmd_convert(value_text, to);
    else
        r = cli::cmd_compare(expr_text, expr_b, fuel);

    std::cout << r.out;
    std::cerr << r.err;
    return r.code;
}
