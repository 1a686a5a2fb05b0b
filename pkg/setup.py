import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    install_requires = [line.strip() for line in fh if line.strip()]

setuptools.setup(
    name="qpredec",
    version="0.0.1",
    description="Compiler and evaluation toolchain for qLDPC syndrome predecoders.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=("tests", "tests.*")),
    package_data={"qpredec.fixtures": ["*.json", "*.dem"]},
    install_requires=install_requires,
    entry_points={"console_scripts": ["qpredec=qpredec.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
