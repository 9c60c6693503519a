# setup.py
from setuptools import setup, find_packages

setup(
    name="safe_sql",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={
        'src.application.prompts': ['templates/*.txt'],
    },
    install_requires=[
        'click>=8.0.0',
        'pandas>=2.0.0',
        'kagglehub>=0.1.0',
        'python-dotenv>=0.19.0',
        'sqlglot>=23.0.0',
        'openai>=1.0.0',
        'backoff>=2.0.0',
        'numpy>=1.24.0',
        'tqdm>=4.60.0',
    ],
    extras_require={
        'test': ['pytest>=7.0.0'],
    },
    entry_points={
        'console_scripts': [
            'safe-sql=src.presentation.cli.main:cli',
        ],
    },
    description="Self-generated, scored and filtered in-context examples for Text-to-SQL",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    python_requires=">=3.9",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
