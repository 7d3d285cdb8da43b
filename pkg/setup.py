from setuptools import setup, find_packages

setup(
    name="hp-boundary-layer",
    version="1.0.0",
    description="hp-FEM on spectral boundary layer meshes for singularly perturbed reaction-diffusion",
    author="hp-FEM Development Team",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.12.0",
        "pyyaml>=6.0",
        "pandas>=2.0.0",
        "tqdm>=4.65.0",
    ],
    extras_require={
        "cholmod": ["scikit-sparse>=0.4.12"],
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": ["hp-study = src.cli.main:main"],
    },
    python_requires=">=3.9",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
