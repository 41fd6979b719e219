// Writes the built-in test shells as OBJ files, e.g. for trying the CLI.
#include <filesystem>
#include <iostream>

#include "fixtures.hpp"
#include "freeshell/mesh_io.hpp"

int main(int argc, char** argv)
{
    const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
    std::filesystem::create_directories(dir);
    using namespace freeshell;
    save_mesh(fixtures::flat_square(), dir / "flat_square.obj", MeshFormat::OBJ);
    save_mesh(fixtures::cone_cap(), dir / "cone_cap.obj", MeshFormat::OBJ);
    save_mesh(fixtures::hemisphere(), dir / "hemisphere.obj", MeshFormat::OBJ);
    std::cout << "wrote fixtures to " << dir.string() << "\n";
    return 0;
}
