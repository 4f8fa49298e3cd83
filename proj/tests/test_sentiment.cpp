#include <doctest.h>

#include "triage/sentiment.hpp"

using namespace triage;
using namespace triage::sentiment;

namespace {

const Lexicon &small() {
  static const Lexicon lex = Lexicon::parse("[terms]\ngood 3 0.6\nawful -4 0.9\ncrash -3 0.7\n"
                                            "[negators]\nnot\n[intensifiers]\nvery 1.5\n");
  return lex;
}

std::vector<std::string> toks(std::initializer_list<const char *> t) { return {t.begin(), t.end()}; }

} // namespace

TEST_SUITE("sentiment") {

TEST_CASE("neutral text keeps the defaults") {
  auto s = score(toks({"nothing", "here"}), small());
  CHECK(s.positivity == 1);
  CHECK(s.negativity == -1);
  CHECK(s.polarity == 0.0);
  CHECK(s.subjectivity == 0.0);
}

TEST_CASE("strongest term on each side") {
  auto d = score_dual(toks({"good", "but", "awful", "crash"}), small());
  CHECK(d.positivity == 3);
  CHECK(d.negativity == -4);
}

TEST_CASE("negation flips, intensifiers scale and clamp") {
  CHECK(score_dual(toks({"not", "good"}), small()).negativity == -3);
  CHECK(score_dual(toks({"not", "very", "good"}), small()).negativity == -5); // 4.5 rounds away from zero
  CHECK(score_dual(toks({"very", "awful"}), small()).negativity == -5);        // 6 clamps to 5
  CHECK(score_dual(toks({"not", "x", "y", "good"}), small()).positivity == 3); // outside the window
}

TEST_CASE("polarity and subjectivity are means over scored terms") {
  auto p = score_polarity_subjectivity(toks({"good", "awful"}), small());
  CHECK(p.polarity == doctest::Approx((3.0 / 5 - 4.0 / 5) / 2));
  CHECK(p.subjectivity == doctest::Approx(0.75));
}

TEST_CASE("mirrored lexicon negates scores") {
  auto m = small().mirrored();
  auto d = score_dual(toks({"good", "awful"}), m);
  CHECK(d.positivity == 4);
  CHECK(d.negativity == -3);
  CHECK(m.checksum() != small().checksum());
}

TEST_CASE("lexicon validation") {
  CHECK_THROWS(Lexicon::parse("[terms]\nx 7 0.5\n"));
  CHECK_THROWS(Lexicon::parse("[terms]\nx 0 0.5\n"));
  CHECK_THROWS(Lexicon::parse("[terms]\nx 2 1.5\n"));
  CHECK_THROWS(Lexicon::parse("[terms]\nnot -1 0.5\n[negators]\nnot\n"));
  CHECK_THROWS(Lexicon::parse("x 1 0.5\n"));
}

TEST_CASE("builtin lexicon is lemmatized") {
  const auto &lex = Lexicon::builtin();
  CHECK(lex.size() > 500);
  CHECK(lex.find("crash") != nullptr);
  CHECK(lex.is_negator("not"));
  CHECK(lex.intensifier("very").has_value());
  auto doc = text::normalize_pipeline("This is a great library but it crashes", text::Source::Description);
  auto d = score_dual(doc);
  CHECK(d.positivity >= 3);
  CHECK(d.negativity <= -2);
}

}
