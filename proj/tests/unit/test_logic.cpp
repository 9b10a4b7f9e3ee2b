#include <catch_amalgamated.hpp>

#include <cskmc/logic.hpp>

using namespace cskmc;

namespace {
std::vector<bool> bits(const std::string& msb_first) {
  std::vector<bool> b(msb_first.size());
  for (std::size_t i = 0; i < msb_first.size(); ++i) b[msb_first.size() - 1 - i] = msb_first[i] == '1';
  return b;
}
}  // namespace

TEST_CASE("thermometer decode table") {
  auto t2 = thermometer_decode_table(2);
  REQUIRE(t2.size() == 4);
  CHECK(t2[2].B == bits("011"));
  CHECK(t2[2].Y == bits("10"));
  CHECK(t2[0].B == bits("000"));
  CHECK(t2[0].Y == bits("00"));
  auto t3 = thermometer_decode_table(3);
  CHECK(t3[5].B == bits("0011111"));
  CHECK(t3[5].Y == bits("101"));
  CHECK_THROWS(thermometer_decode_table(0));
}

TEST_CASE("AND-free back-end expressions") {
  CHECK(ilf_backend(1)[0].str() == "B0");
  auto y2 = ilf_backend(2);
  CHECK(y2[1].str() == "B1");
  CHECK(y2[0].str() == "B2 + !(B1 + !B0)");
  auto y3 = ilf_backend(3);
  CHECK(y3[0].str() == "B6 + !(B5 + !B4) + !(B3 + !B2) + !(B1 + !B0)");
  for (int m = 1; m <= 6; ++m)
    for (const auto& e : ilf_backend(m)) {
      CHECK_FALSE(e.contains_and());
      CHECK(e.max_not_depth() <= 2);
    }
}

TEST_CASE("sum of products rows") {
  CHECK(sop_backend(1)[0].str() == "B0");
  CHECK(sop_backend(2)[1].str() == "!B2*B1*B0 + B2*B1*B0");
}

TEST_CASE("ILF, SOP and the decode table agree on every valid code") {
  for (int m = 1; m <= 6; ++m) {
    auto ilf = ilf_backend(m);
    auto sop = sop_backend(m);
    for (const auto& row : thermometer_decode_table(m))
      for (int i = 0; i < m; ++i) {
        auto ui = static_cast<std::size_t>(i);
        CHECK(ilf[ui].eval(row.B) == row.Y[ui]);
        CHECK(sop[ui].eval(row.B) == row.Y[ui]);
      }
  }
}
