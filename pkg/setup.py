from setuptools import find_packages, setup

setup(
    name="pyplancherel",
    author="Davy Risso <davy.risso@gmail.com>",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"pyplancherel": ["py.typed"]},
    install_requires=["numpy>=1.22", "scipy>=1.9"],
    entry_points={"console_scripts": ["pyplancherel = pyplancherel.cli:main"]},
)
