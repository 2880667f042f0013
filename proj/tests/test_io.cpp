#include <cstdio>
#include <fstream>
#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "nystrom/matrix_io.hpp"

using nystrom::Matrix;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/nystrom_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("matrix CSV round trip is bit exact") {
    Matrix m(2, 3);
    m << 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308,
         0.1, -0.0, 4.9e-324;  // subnormal, signed zero, extremes
    const std::string path = "/tmp/nystrom_test_roundtrip.csv";
    nystrom::save_matrix_csv(path, m);
    const Matrix back = nystrom::load_matrix_csv(path);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    for (nystrom::Index i = 0; i < 2; ++i) {
        for (nystrom::Index j = 0; j < 3; ++j) {
            REQUIRE(back(i, j) == m(i, j));
        }
    }
    std::remove(path.c_str());

    SECTION("non-finite entries are refused at save time") {
        Matrix bad = Matrix::Ones(2, 2);
        bad(0, 1) = std::numeric_limits<double>::infinity();
        REQUIRE_THROWS_AS(nystrom::save_matrix_csv(path, bad),
                          nystrom::InvalidInputError);
    }
}

TEST_CASE("load_matrix_csv enforces the declared size and shape") {
    SECTION("size comment is honored when consistent") {
        const auto path = write_temp("io_ok.csv", "# n=2\n1,2\n3,4\n");
        const Matrix m = nystrom::load_matrix_csv(path);
        REQUIRE(m(1, 0) == 3.0);
        std::remove(path.c_str());
    }
    SECTION("mismatched size comment is a parse error") {
        const auto path = write_temp("io_badn.csv", "# n=3\n1,2\n3,4\n");
        REQUIRE_THROWS_AS(nystrom::load_matrix_csv(path), nystrom::ParseError);
        std::remove(path.c_str());
    }
    SECTION("ragged rows are a parse error naming the line") {
        const auto path = write_temp("io_ragged.csv", "1,2\n3\n");
        try {
            nystrom::load_matrix_csv(path);
            FAIL("expected ParseError");
        } catch (const nystrom::ParseError& e) {
            REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        }
        std::remove(path.c_str());
    }
    SECTION("bad numbers are a parse error naming the line") {
        const auto path = write_temp("io_badnum.csv", "1,2\n3,4x\n");
        try {
            nystrom::load_matrix_csv(path);
            FAIL("expected ParseError");
        } catch (const nystrom::ParseError& e) {
            REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        }
        std::remove(path.c_str());
    }
    SECTION("overflowing numbers are a parse error, tiny ones are not") {
        const auto path = write_temp("io_over.csv", "1,1e400\n");
        REQUIRE_THROWS_AS(nystrom::load_matrix_csv(path), nystrom::ParseError);
        std::remove(path.c_str());
        const auto tiny = write_temp("io_tiny.csv", "1,1e-320\n");
        REQUIRE(nystrom::load_matrix_csv(tiny)(0, 1) == 1e-320);
        std::remove(tiny.c_str());
    }
    SECTION("missing file is an io error") {
        REQUIRE_THROWS_AS(nystrom::load_matrix_csv("/tmp/missing_io_49821.csv"),
                          nystrom::IoError);
    }
    SECTION("a file with only comments is a parse error") {
        const auto path = write_temp("io_empty.csv", "# n=0\n");
        REQUIRE_THROWS_AS(nystrom::load_matrix_csv(path), nystrom::ParseError);
        std::remove(path.c_str());
    }
}

TEST_CASE("load_gram_csv validates symmetry and positive semidefiniteness") {
    SECTION("a valid Gram matrix loads") {
        const auto path = write_temp("io_gram.csv", "2,1\n1,2\n");
        const auto g = nystrom::load_gram_csv(path);
        REQUIRE(g.size() == 2);
        REQUIRE(g(0, 1) == 1.0);
        std::remove(path.c_str());
    }
    SECTION("asymmetric input is rejected") {
        const auto path = write_temp("io_asym.csv", "1,5\n0,1\n");
        REQUIRE_THROWS_AS(nystrom::load_gram_csv(path), nystrom::InvalidInputError);
        std::remove(path.c_str());
    }
    SECTION("indefinite input is rejected") {
        const auto path = write_temp("io_indef.csv", "1,0\n0,-1\n");
        REQUIRE_THROWS_AS(nystrom::load_gram_csv(path), nystrom::InvalidInputError);
        std::remove(path.c_str());
    }
    SECTION("non-square input is rejected") {
        const auto path = write_temp("io_rect.csv", "1,2,3\n4,5,6\n");
        REQUIRE_THROWS_AS(nystrom::load_gram_csv(path), nystrom::InvalidInputError);
        std::remove(path.c_str());
    }
}
