#include <gtest/gtest.h>

#include <sstream>

#include "common.hpp"
#include "oitrunc/design.hpp"

using namespace oitrunc;
using testing_support::fixture;
using testing_support::make_dataset;

TEST(ReadCsv, ParsesSmallFile) {
  std::istringstream in("y,x1\n1,0.5\n3,1.5\n");
  const Dataset d = read_csv(in);
  EXPECT_EQ(d.rows(), 2u);
  ASSERT_EQ(d.column_names.size(), 2u);
  EXPECT_EQ(d.column_names[1], "x1");
  EXPECT_DOUBLE_EQ(d.column("x1")[1], 1.5);
}

TEST(ReadCsv, NonNumericCellNamesRowAndColumn) {
  std::istringstream in("y,x1\n1,NA\n");
  try {
    read_csv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "x1");
    EXPECT_NE(std::string(e.what()).find("x1"), std::string::npos);
  }
}

TEST(ReadCsv, RejectsRaggedAndEmpty) {
  std::istringstream ragged("y,x1\n1,2\n3\n");
  EXPECT_THROW(read_csv(ragged), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), DataError);
  std::istringstream header_only("y,x1\n");
  EXPECT_THROW(read_csv(header_only), DataError);
}

TEST(ReadCsv, ToleratesBomAndCrlf) {
  std::istringstream in("\xEF\xBB\xBFy,x\r\n2,1\r\n\r\n");
  const Dataset d = read_csv(in);
  EXPECT_EQ(d.column_names[0], "y");
  EXPECT_EQ(d.rows(), 1u);
}

TEST(LoadCsv, MissingFileNamesPath) {
  try {
    load_csv("/nonexistent/dir/data.csv");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/data.csv"), std::string::npos);
  }
}

TEST(LoadCsv, MedparFixture) {
  const auto path = fixture("medpar.csv");
  if (!path) GTEST_SKIP() << "medpar.csv fixture not present";
  const Dataset d = load_csv(*path);
  EXPECT_EQ(d.rows(), 1495u);
  for (const char* c : {"los", "white", "died", "type2", "type3"}) {
    EXPECT_TRUE(d.index_of(c).has_value()) << c;
  }
}

TEST(WriteCsv, RoundTripIsBitExact) {
  const Dataset d = make_dataset({"a", "b"}, {{0.1, 1e-300, -3.25}, {1.0 / 3.0, 123456789.0, 0.0}});
  std::stringstream ss;
  write_csv(d, ss);
  const Dataset back = read_csv(ss);
  ASSERT_EQ(back.columns.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.columns[j][i], d.columns[j][i]);
  }
}

TEST(BuildDesign, InterceptsAndShapes) {
  const Dataset d = make_dataset({"y", "x1"}, {{1, 2, 3}, {0.5, 1.5, 2.5}});
  const DesignData dd = build_design({Family::OIPP, "y", {"x1"}, {"x1"}}, d);
  EXPECT_EQ(dd.X.rows(), 3);
  EXPECT_EQ(dd.X.cols(), 2);
  ASSERT_TRUE(dd.Z.has_value());
  EXPECT_EQ(dd.Z->cols(), 2);
  EXPECT_EQ(dd.x_names[0], kInterceptName);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(dd.X(i, 0), 1.0);
    EXPECT_EQ((*dd.Z)(i, 0), 1.0);
    EXPECT_EQ(dd.X(i, 1), d.columns[1][static_cast<std::size_t>(i)]);
  }
  EXPECT_EQ(dd.ones_mask, (std::vector<bool>{true, false, false}));

  const DesignData base = build_design({Family::ZTNB, "y", {"x1"}, {}}, d);
  EXPECT_FALSE(base.Z.has_value());
}

TEST(BuildDesign, ZTermsRule) {
  const Dataset d = make_dataset({"y", "x1"}, {{1, 2}, {0.5, 1.5}});
  EXPECT_THROW(build_design({Family::PP, "y", {"x1"}, {"x1"}}, d), std::invalid_argument);
  EXPECT_THROW(build_design({Family::OIPP, "y", {"x1"}, {}}, d), std::invalid_argument);
}

TEST(BuildDesign, DummyFlags) {
  const Dataset d = make_dataset({"y", "d", "c", "k"},
                                 {{1, 2, 3}, {0, 1, 0}, {0, 1, 2}, {1, 1, 1}});
  const DesignData dd = build_design({Family::PP, "y", {"d", "c"}, {}}, d);
  EXPECT_EQ(dd.x_dummy, (std::vector<bool>{false, true, false}));
  const DesignData forced = build_design({Family::PP, "y", {"d", "c"}, {}}, d, {"d"});
  EXPECT_EQ(forced.x_dummy, (std::vector<bool>{false, false, false}));
}

TEST(BuildDesign, ResponseValidation) {
  const Dataset zeros = make_dataset({"y", "x"}, {{0, 2}, {1, 2}});
  try {
    build_design({Family::PP, "y", {"x"}, {}}, zeros);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  const Dataset frac = make_dataset({"y", "x"}, {{1.5, 2}, {1, 2}});
  EXPECT_ANY_THROW(build_design({Family::PP, "y", {"x"}, {}}, frac));
  EXPECT_THROW(build_design({Family::PP, "y", {"nope"}, {}}, frac), DataError);
}

TEST(BuildDesign, OrderPreserving) {
  const Dataset d = make_dataset({"y", "a", "b"}, {{1, 2}, {3, 4}, {5, 6}});
  const DesignData dd = build_design({Family::PP, "y", {"b", "a"}, {}}, d);
  EXPECT_EQ(dd.x_names[1], "b");
  EXPECT_EQ(dd.X(0, 1), 5.0);
  EXPECT_EQ(dd.X(1, 2), 4.0);
}
