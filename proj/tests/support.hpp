#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace testing {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        m_path = std::filesystem::temp_directory_path() /
                 ("gpmi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(m_path);
        std::filesystem::create_directories(m_path);
    }
    ~TempDir() { std::filesystem::remove_all(m_path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return m_path.string(); }
    std::string file(const std::string& name) const { return (m_path / name).string(); }

private:
    std::filesystem::path m_path;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

} // namespace testing

#define CHECK_GPMI_ERROR(expr, expected_code)                                                                     \
    do {                                                                                                           \
        bool thrown_ = false;                                                                                      \
        try {                                                                                                      \
            (void)(expr);                                                                                          \
        } catch (const gpmi::Error& e_) {                                                                          \
            thrown_ = true;                                                                                        \
            CHECK(e_.code() == (expected_code));                                                                   \
        }                                                                                                          \
        CHECK_MESSAGE(thrown_, "expected gpmi::Error from " #expr);                                                \
    } while (false)
