#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "pisa/dram/subarray.hpp"

using namespace pisa;
using testutil::kind_of;

namespace {

DramRow random_row(std::mt19937_64& rng) {
  DramRow r;
  for (std::size_t i = 0; i < kSubArrayCols; i += 64) r |= DramRow(rng()) << i;
  return r;
}

DramRow pattern(bool value) { return value ? ~DramRow{} : DramRow{}; }

}  // namespace

TEST_CASE("charge sharing voltages") {
  CHECK(charge_share_voltage({2, 2, 1.2}) == 1.2);
  CHECK(charge_share_voltage({1, 2, 1.2}) == 0.6);
  CHECK(charge_share_voltage({0, 2, 1.2}) == 0.0);
  CHECK(kind_of([] { charge_share_voltage({3, 2, 1.2}); }) == ErrorKind::InvalidCount);
  CHECK(kind_of([] { charge_share_voltage({0, 0, 1.2}); }) == ErrorKind::InvalidCount);
}

TEST_CASE("DRA truth table over all columns") {
  DramSubArray sa;
  const std::size_t x1 = sa.compute_row(0);
  const std::size_t x2 = sa.compute_row(1);
  const std::size_t x3 = sa.compute_row(2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      sa.write_row(x1, pattern(a != 0));
      sa.write_row(x2, pattern(b != 0));
      const DraOutput out = sa.dra_nand(x1, x2, x3, 0);
      const double v = charge_share_voltage({static_cast<unsigned>(a + b), 2, 1.2});
      const bool nand = dra_nand_decision(v, 1.2);
      CHECK(nand == !(a && b));
      CHECK(out.nand == pattern(nand));
      CHECK(out.and_ == pattern(!nand));
      CHECK(sa.peek(x3) == out.nand);
      CHECK(sa.peek(0) == out.and_);
    }
  }
  CHECK(sa.counters().dra_cycles == 4);
}

TEST_CASE("DRA on random rows matches a per-column oracle") {
  std::mt19937_64 rng(9);
  DramSubArray sa;
  for (int t = 0; t < 20; ++t) {
    const DramRow a = random_row(rng);
    const DramRow b = random_row(rng);
    sa.write_row(sa.compute_row(0), a);
    sa.write_row(sa.compute_row(1), b);
    const DraOutput out = sa.dra_nand(sa.compute_row(0), sa.compute_row(1), sa.compute_row(2));
    for (std::size_t c = 0; c < kSubArrayCols; ++c) {
      const unsigned n = static_cast<unsigned>(a[c]) + static_cast<unsigned>(b[c]);
      REQUIRE(out.nand[c] == dra_nand_decision(charge_share_voltage({n, 2, 1.2}), 1.2));
    }
  }
}

TEST_CASE("row copy") {
  std::mt19937_64 rng(1);
  DramSubArray sa;
  const DramRow src = random_row(rng);
  sa.write_row(3, src);
  sa.row_copy(3, sa.compute_row(0));
  CHECK(sa.peek(sa.compute_row(0)) == src);
  CHECK(sa.peek(3) == src);
  sa.row_copy(sa.compute_row(0), 10);
  sa.row_copy(10, 11);
  CHECK(sa.read_row(11) == src);
  CHECK(sa.row_buffer() == src);
  CHECK(sa.counters().row_copies == 3);
}

TEST_CASE("TRA majority and its AND/OR uses") {
  std::mt19937_64 rng(3);
  DramSubArray sa;
  const std::size_t x[3] = {sa.compute_row(0), sa.compute_row(1), sa.compute_row(2)};
  const auto set3 = [&](bool a, bool b, bool c) {
    sa.write_row(x[0], pattern(a));
    sa.write_row(x[1], pattern(b));
    sa.write_row(x[2], pattern(c));
  };
  set3(true, true, false);
  CHECK(sa.tra_majority(x[0], x[1], x[2], 0) == pattern(true));
  set3(true, false, false);
  CHECK(sa.tra_majority(x[0], x[1], x[2], 0) == pattern(false));
  set3(true, false, true);
  CHECK(sa.tra_majority(x[0], x[1], x[2], 0) == pattern(true));
  CHECK(sa.counters().tra_steps == 12);

  const DramRow a = random_row(rng);
  const DramRow b = random_row(rng);
  sa.write_row(x[0], a);
  sa.write_row(x[1], b);
  sa.init_row(x[2], true);
  CHECK(sa.tra_majority(x[0], x[1], x[2], 0) == (a | b));
  CHECK(sa.peek(x[0]) == (a | b));

  sa.write_row(1, a);
  sa.write_row(2, b);
  const std::size_t ra[] = {1};
  const std::size_t rb[] = {2};
  CHECK(sa.bulk_and(ra, rb, AndMechanism::TRA).rows[0] == sa.bulk_and(ra, rb, AndMechanism::DRA).rows[0]);
}

TEST_CASE("row pair validation") {
  DramSubArray sa;
  CHECK(kind_of([&] { sa.dra_nand(0, sa.compute_row(1), sa.compute_row(2)); }) == ErrorKind::RowPairInvalid);
  CHECK(kind_of([&] { sa.dra_nand(sa.compute_row(1), sa.compute_row(1), 0); }) == ErrorKind::RowPairInvalid);
  CHECK(kind_of([&] { sa.tra_majority(sa.compute_row(0), sa.compute_row(0), sa.compute_row(1), 0); }) ==
        ErrorKind::RowPairInvalid);
  CHECK(kind_of([&] { sa.read_row(sa.rows()); }) == ErrorKind::AddressOutOfRange);
  CHECK(kind_of([&] { sa.compute_row(12); }) == ErrorKind::AddressOutOfRange);
}

TEST_CASE("bulk AND tallies") {
  std::mt19937_64 rng(6);
  DramSubArray sa;
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < 7; ++i) {
    sa.write_row(2 * i, random_row(rng));
    sa.write_row(2 * i + 1, random_row(rng));
    a.push_back(2 * i);
    b.push_back(2 * i + 1);
  }

  const BulkAndResult one = sa.bulk_and(std::span(a).first(1), std::span(b).first(1), AndMechanism::DRA);
  CHECK(one.tally.row_operations() == 3);
  CHECK(one.tally.row_copies == 2);
  CHECK(one.tally.dra_cycles == 1);
  CHECK(one.tally.latency_s == doctest::Approx(100e-9));
  CHECK(one.rows[0] == (sa.peek(0) & sa.peek(1)));

  const BulkAndResult tra = sa.bulk_and(std::span(a).first(1), std::span(b).first(1), AndMechanism::TRA);
  CHECK(tra.tally.tra_steps == 4);
  CHECK(tra.tally.row_copies == 0);
  CHECK(tra.tally.latency_s == doctest::Approx(360e-9));

  for (AndMechanism m : {AndMechanism::DRA, AndMechanism::TRA}) {
    const BulkAndResult single = sa.bulk_and(std::span(a).first(1), std::span(b).first(1), m);
    const BulkAndResult batch = sa.bulk_and(a, b, m);
    CHECK(batch.tally.pairs == 7);
    CHECK(batch.tally.row_copies == 7 * single.tally.row_copies);
    CHECK(batch.tally.dra_cycles == 7 * single.tally.dra_cycles);
    CHECK(batch.tally.tra_steps == 7 * single.tally.tra_steps);
    CHECK(batch.tally.cycles == 7 * single.tally.cycles);
    CHECK(batch.tally.latency_s == doctest::Approx(7 * single.tally.latency_s));
    for (std::size_t i = 0; i < 7; ++i) CHECK(batch.rows[i] == (sa.peek(a[i]) & sa.peek(b[i])));
  }
}

TEST_CASE("bulk AND capacity") {
  DramSubArray tiny(8, 3);
  const std::size_t a[] = {0};
  const std::size_t b[] = {1};
  CHECK_NOTHROW(tiny.bulk_and(a, b, AndMechanism::DRA));
  CHECK(kind_of([&] { tiny.bulk_and(a, b, AndMechanism::TRA); }) == ErrorKind::CapacityExceeded);
  DramSubArray none(8, 2);
  CHECK(kind_of([&] { none.bulk_and(a, b, AndMechanism::DRA); }) == ErrorKind::CapacityExceeded);
  const std::size_t two[] = {0, 1};
  CHECK(kind_of([&] { tiny.bulk_and(two, b, AndMechanism::DRA); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("PNS organization defaults") {
  const PnsOrganization org;
  CHECK(org.rows_per_subarray == 1024);
  CHECK(org.cols == 256);
  CHECK_NOTHROW(org.validate());
  PnsOrganization bad = org;
  bad.parallel_subarrays = 0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigError);
}
