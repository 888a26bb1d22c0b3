from setuptools import setup, find_packages

setup(
    name="fgfield",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        'numpy',
        'scipy',
        'matplotlib',
        'structlog',
        'pydantic>=2',
        'python-dotenv',
    ],
    extras_require={
        'test': ['pytest', 'pytest-mock', 'pytest-cov'],
    },
    entry_points={
        'console_scripts': [
            'fgfield=fgfield.cli.app:main',
        ],
    },
)
