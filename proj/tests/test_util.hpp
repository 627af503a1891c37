#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

// Scratch directory that cleans up after a test.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path = base / ("svcnn_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }

    std::string write(const std::string& name, const std::string& contents) const {
        std::ofstream out(path / name, std::ios::binary);
        out << contents;
        return (path / name).string();
    }
};
