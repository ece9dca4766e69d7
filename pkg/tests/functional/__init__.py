"""Functional tests for package-level functionality"""
